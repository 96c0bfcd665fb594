//! The declarative input language and its canonical renderer.
//!
//! Documents are sequences of named blocks, `name { key = expr; ... }`.
//! Statements end at `;` or at a newline (newlines inside parentheses or
//! square brackets continue the statement), and `#` starts a line comment.
//! Expressions are built from rationals, `x<i>`, `xi<i>`, `d/dx<i>`,
//! `d/dxi<i>` with `+ - * / ^`, parentheses, and `[X, Y]` for the graded
//! commutator of two vector-field expressions. `^` between a function and an
//! integer is a power; between odd generators it is just the product, which
//! is how canonical renderings spell odd monomials (`xi1^xi3`).
//!
//! Everything renders back out through [`render_document`]; parsing a
//! rendered document reproduces it verbatim.

use crate::algebroid::LieAlgebroidData;
use crate::error::{Error, Result};
use crate::graded::{GradedFunction, OddMonomial, Signature};
use crate::lie2::StrictLie2Algebra;
use crate::poly::Poly;
use crate::scalar::{render_rat, Rat};
use crate::vector_field::VectorField;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(BigInt),
    Str(String),
    DDx(usize),
    DDxi(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Eq,
    Newline,
}

#[derive(Debug, Clone)]
struct SpTok {
    tok: Tok,
    line: usize,
    col: usize,
}

fn perr<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        col,
        msg: msg.into(),
    })
}

fn lex(text: &str) -> Result<Vec<SpTok>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    let mut depth = 0usize; // ( and [ nesting: newlines inside continue statements
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        let mut push = |tok: Tok| {
            out.push(SpTok {
                tok,
                line: l0,
                col: c0,
            })
        };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
                if depth == 0 {
                    push(Tok::Newline);
                }
            }
            ' ' | '\t' | '\r' => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '"' => {
                chars.next();
                col += 1;
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => {
                            col += 1;
                            break;
                        }
                        Some('\n') | None => return perr(l0, c0, "unterminated string"),
                        Some(ch) => {
                            s.push(ch);
                            col += 1;
                        }
                    }
                }
                push(Tok::Str(s));
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_digit() {
                        s.push(c2);
                        chars.next();
                        col += 1;
                    } else if c2 == '.' {
                        return perr(line, col, "decimal literals are not supported; use exact fractions like 3/2");
                    } else {
                        break;
                    }
                }
                push(Tok::Number(s.parse().expect("digits parse as an integer")));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        s.push(c2);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                // d/dx<i> and d/dxi<i> are single tokens
                if s == "d" && chars.peek() == Some(&'/') {
                    let mut clone = chars.clone();
                    clone.next(); // '/'
                    let mut rest = String::new();
                    while let Some(&c2) = clone.peek() {
                        if c2.is_ascii_alphanumeric() {
                            rest.push(c2);
                            clone.next();
                        } else {
                            break;
                        }
                    }
                    let parse_idx = |body: &str| -> Option<usize> {
                        body.parse::<usize>().ok().filter(|&i| i >= 1)
                    };
                    if let Some(body) = rest.strip_prefix("dxi") {
                        if let Some(idx) = parse_idx(body) {
                            chars = clone;
                            col += 1 + rest.len();
                            push(Tok::DDxi(idx - 1));
                            continue;
                        }
                    }
                    if let Some(body) = rest.strip_prefix("dx") {
                        if let Some(idx) = parse_idx(body) {
                            chars = clone;
                            col += 1 + rest.len();
                            push(Tok::DDx(idx - 1));
                            continue;
                        }
                    }
                }
                push(Tok::Ident(s));
            }
            _ => {
                chars.next();
                col += 1;
                let tok = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '(' => {
                        depth += 1;
                        Tok::LParen
                    }
                    ')' => {
                        depth = depth.saturating_sub(1);
                        Tok::RParen
                    }
                    '[' => {
                        depth += 1;
                        Tok::LBracket
                    }
                    ']' => {
                        depth = depth.saturating_sub(1);
                        Tok::RBracket
                    }
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Eq,
                    _ => return perr(l0, c0, format!("unexpected character '{}'", c)),
                };
                push(tok);
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Raw block structure
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
struct RawEntry {
    key: String,
    /// Bracket groups after the key: `nabla[1][2,3]` gives two groups.
    index_groups: Vec<Vec<IndexArg>>,
    value: Vec<SpTok>,
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum IndexArg {
    Int(i64),
    Name(String),
    /// `e1^e2` inside an index group.
    Wedge(String, String),
}

#[derive(Debug, Clone)]
struct RawBlock {
    kind: String,
    name: Option<String>,
    entries: Vec<RawEntry>,
    line: usize,
    col: usize,
}

struct Cursor {
    toks: Vec<SpTok>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&SpTok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<SpTok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn skip_separators(&mut self) {
        while matches!(
            self.peek().map(|t| &t.tok),
            Some(Tok::Newline) | Some(Tok::Semi)
        ) {
            self.pos += 1;
        }
    }

    fn here(&self) -> (usize, usize) {
        self.peek()
            .map(|t| (t.line, t.col))
            .unwrap_or((0, 0))
    }
}

fn parse_blocks(text: &str) -> Result<Vec<RawBlock>> {
    let toks = lex(text)?;
    let mut cur = Cursor { toks, pos: 0 };
    let mut blocks = Vec::new();
    loop {
        cur.skip_separators();
        let Some(t) = cur.next() else { break };
        let (line, col) = (t.line, t.col);
        let Tok::Ident(kind) = t.tok else {
            return perr(line, col, "expected a block name");
        };
        cur.skip_separators();
        let mut name = None;
        if let Some(t) = cur.peek() {
            match &t.tok {
                Tok::Ident(n) => {
                    name = Some(n.clone());
                    cur.next();
                    cur.skip_separators();
                }
                Tok::Str(n) => {
                    name = Some(n.clone());
                    cur.next();
                    cur.skip_separators();
                }
                _ => {}
            }
        }
        match cur.next().map(|t| t.tok) {
            Some(Tok::LBrace) => {}
            _ => return perr(line, col, format!("expected '{{' after block '{}'", kind)),
        }
        let mut entries = Vec::new();
        loop {
            cur.skip_separators();
            let (el, ec) = cur.here();
            match cur.peek().map(|t| t.tok.clone()) {
                Some(Tok::RBrace) => {
                    cur.next();
                    break;
                }
                Some(Tok::Ident(key)) => {
                    cur.next();
                    let mut index_groups = Vec::new();
                    while matches!(cur.peek().map(|t| &t.tok), Some(Tok::LBracket)) {
                        cur.next();
                        let mut group = Vec::new();
                        loop {
                            let (al, ac) = cur.here();
                            let arg = match cur.next().map(|t| t.tok) {
                                Some(Tok::Number(n)) => IndexArg::Int(i64::try_from(&n).map_err(
                                    |_| Error::Parse {
                                        line: al,
                                        col: ac,
                                        msg: "index too large".into(),
                                    },
                                )?),
                                Some(Tok::Ident(s)) => {
                                    if matches!(cur.peek().map(|t| &t.tok), Some(Tok::Caret)) {
                                        cur.next();
                                        let (bl, bc) = cur.here();
                                        match cur.next().map(|t| t.tok) {
                                            Some(Tok::Ident(s2)) => IndexArg::Wedge(s, s2),
                                            _ => {
                                                return perr(bl, bc, "expected a basis name after '^'")
                                            }
                                        }
                                    } else {
                                        IndexArg::Name(s)
                                    }
                                }
                                _ => return perr(al, ac, "expected an index"),
                            };
                            group.push(arg);
                            match cur.next().map(|t| t.tok) {
                                Some(Tok::Comma) => continue,
                                Some(Tok::RBracket) => break,
                                _ => return perr(al, ac, "expected ',' or ']' in index list"),
                            }
                        }
                        index_groups.push(group);
                    }
                    let (ql, qc) = cur.here();
                    match cur.next().map(|t| t.tok) {
                        Some(Tok::Eq) => {}
                        _ => return perr(ql, qc, format!("expected '=' after key '{}'", key)),
                    }
                    let mut value = Vec::new();
                    loop {
                        match cur.peek().map(|t| &t.tok) {
                            Some(Tok::Newline) | Some(Tok::Semi) | Some(Tok::RBrace) | None => {
                                break
                            }
                            _ => value.push(cur.next().expect("peeked")),
                        }
                    }
                    if value.is_empty() {
                        return perr(el, ec, format!("missing value for key '{}'", key));
                    }
                    entries.push(RawEntry {
                        key,
                        index_groups,
                        value,
                        line: el,
                        col: ec,
                    });
                }
                Some(_) => return perr(el, ec, "expected a key or '}'"),
                None => return perr(line, col, format!("unterminated block '{}'", kind)),
            }
        }
        blocks.push(RawBlock {
            kind,
            name,
            entries,
            line,
            col,
        });
    }
    Ok(blocks)
}

// ---------------------------------------------------------------------------
// Expression evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Value {
    Scalar(Rat),
    Graded(GradedFunction),
    Field(VectorField),
}

struct ExprCtx<'a> {
    sig: Signature,
    q: Option<&'a VectorField>,
}

impl ExprCtx<'_> {
    fn as_graded(&self, v: Value, line: usize, col: usize) -> Result<GradedFunction> {
        match v {
            Value::Scalar(c) => Ok(GradedFunction::constant(self.sig, c)),
            Value::Graded(g) => Ok(g),
            Value::Field(_) => perr(line, col, "expected a function, found a vector field"),
        }
    }

    fn as_field(&self, v: Value, line: usize, col: usize) -> Result<VectorField> {
        match v {
            Value::Field(f) => Ok(f),
            _ => perr(line, col, "expected a vector field expression"),
        }
    }
}

struct ExprParser<'a> {
    toks: &'a [SpTok],
    pos: usize,
    ctx: &'a ExprCtx<'a>,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&SpTok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<SpTok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek()
            .map(|t| (t.line, t.col))
            .or_else(|| self.toks.last().map(|t| (t.line, t.col)))
            .unwrap_or((0, 0))
    }

    fn parse(&mut self, min_bp: u8) -> Result<Value> {
        let (line, col) = self.here();
        let mut lhs = match self.next().map(|t| t.tok) {
            Some(Tok::Number(n)) => Value::Scalar(Rat::from_integer(n)),
            Some(Tok::Ident(s)) => self.atom_ident(&s, line, col)?,
            Some(Tok::DDx(i)) => {
                if i >= self.ctx.sig.n {
                    return perr(line, col, format!("d/dx{} exceeds the base dimension", i + 1));
                }
                Value::Field(VectorField::d_dx(self.ctx.sig, i))
            }
            Some(Tok::DDxi(a)) => {
                if a >= self.ctx.sig.r {
                    return perr(line, col, format!("d/dxi{} exceeds the rank", a + 1));
                }
                Value::Field(VectorField::d_dxi(self.ctx.sig, a))
            }
            Some(Tok::Minus) => {
                let v = self.parse(15)?;
                match v {
                    Value::Scalar(c) => Value::Scalar(-c),
                    Value::Graded(g) => Value::Graded(-&g),
                    Value::Field(f) => Value::Field(-&f),
                }
            }
            Some(Tok::LParen) => {
                let v = self.parse(0)?;
                let (l2, c2) = self.here();
                match self.next().map(|t| t.tok) {
                    Some(Tok::RParen) => v,
                    _ => return perr(l2, c2, "expected ')'"),
                }
            }
            Some(Tok::LBracket) => {
                let left = self.parse(0)?;
                let (l2, c2) = self.here();
                match self.next().map(|t| t.tok) {
                    Some(Tok::Comma) => {}
                    _ => return perr(l2, c2, "expected ',' in a bracket [X, Y]"),
                }
                let right = self.parse(0)?;
                let (l3, c3) = self.here();
                match self.next().map(|t| t.tok) {
                    Some(Tok::RBracket) => {}
                    _ => return perr(l3, c3, "expected ']'"),
                }
                let lf = self.ctx.as_field(left, line, col)?;
                let rf = self.ctx.as_field(right, line, col)?;
                Value::Field(lf.commutator(&rf))
            }
            _ => return perr(line, col, "expected an expression"),
        };

        loop {
            let (ol, oc) = self.here();
            let (op, bp) = match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => (Tok::Plus, 10),
                Some(Tok::Minus) => (Tok::Minus, 10),
                Some(Tok::Star) => (Tok::Star, 20),
                Some(Tok::Slash) => (Tok::Slash, 20),
                Some(Tok::Caret) => (Tok::Caret, 30),
                _ => break,
            };
            if bp < min_bp {
                break;
            }
            self.next();
            let rhs = self.parse(bp + 1)?;
            lhs = self.apply(op, lhs, rhs, ol, oc)?;
        }
        Ok(lhs)
    }

    fn atom_ident(&mut self, s: &str, line: usize, col: usize) -> Result<Value> {
        if let Some(rest) = s.strip_prefix("xi") {
            if let Ok(idx) = rest.parse::<usize>() {
                if idx == 0 || idx > self.ctx.sig.r {
                    return perr(line, col, format!("xi{} exceeds the rank", idx));
                }
                return Ok(Value::Graded(GradedFunction::odd_var(self.ctx.sig, idx - 1)));
            }
        }
        if let Some(rest) = s.strip_prefix('x') {
            if let Ok(idx) = rest.parse::<usize>() {
                if idx == 0 || idx > self.ctx.sig.n {
                    return perr(line, col, format!("x{} exceeds the base dimension", idx));
                }
                return Ok(Value::Graded(GradedFunction::base_var(self.ctx.sig, idx - 1)));
            }
        }
        if s == "Q" {
            return match self.ctx.q {
                Some(q) => Ok(Value::Field(q.clone())),
                None => Err(Error::UnresolvedReference(
                    "expression uses Q but the document has no q_field or algebroid".into(),
                )),
            };
        }
        perr(line, col, format!("unknown identifier '{}'", s))
    }

    fn apply(&self, op: Tok, lhs: Value, rhs: Value, line: usize, col: usize) -> Result<Value> {
        use Value::*;
        match op {
            Tok::Plus | Tok::Minus => {
                let negate = matches!(op, Tok::Minus);
                match (lhs, rhs) {
                    (Field(a), Field(b)) => Ok(Field(if negate { &a - &b } else { &a + &b })),
                    (Field(_), _) | (_, Field(_)) => {
                        perr(line, col, "cannot add a function and a vector field")
                    }
                    (a, b) => {
                        let ga = self.ctx.as_graded(a, line, col)?;
                        let gb = self.ctx.as_graded(b, line, col)?;
                        Ok(Graded(if negate { &ga - &gb } else { &ga + &gb }))
                    }
                }
            }
            Tok::Star => match (lhs, rhs) {
                (Scalar(a), Scalar(b)) => Ok(Scalar(a * b)),
                (Scalar(a), Field(f)) | (Field(f), Scalar(a)) => Ok(Field(f.scale(&a))),
                (Field(_), _) => perr(
                    line,
                    col,
                    "functions multiply vector fields from the left: write f * X",
                ),
                (a, Field(f)) => {
                    let g = self.ctx.as_graded(a, line, col)?;
                    Ok(Field(f.module_mul(&g)))
                }
                (a, b) => {
                    let ga = self.ctx.as_graded(a, line, col)?;
                    let gb = self.ctx.as_graded(b, line, col)?;
                    Ok(Graded(&ga * &gb))
                }
            },
            Tok::Slash => {
                let c = match rhs {
                    Scalar(c) => c,
                    Graded(g) => {
                        let parts = g.degree_parts();
                        let constant = g.coeff(&OddMonomial::unit());
                        if parts.len() <= 1 && constant.is_constant() && !constant.is_zero() {
                            constant.constant_term()
                        } else {
                            return perr(line, col, "division only by nonzero rational constants");
                        }
                    }
                    Field(_) => return perr(line, col, "cannot divide by a vector field"),
                };
                if c.is_zero() {
                    return perr(line, col, "division by zero");
                }
                let inv = Rat::one() / c;
                match lhs {
                    Scalar(a) => Ok(Scalar(a * inv)),
                    Graded(g) => Ok(Graded(g.scale(&inv))),
                    Field(f) => Ok(Field(f.scale(&inv))),
                }
            }
            Tok::Caret => match rhs {
                Scalar(c) => {
                    if !c.is_integer() || c < Rat::zero() {
                        return perr(line, col, "exponents must be non-negative integers");
                    }
                    let e = u32::try_from(c.to_integer()).map_err(|_| Error::Parse {
                        line,
                        col,
                        msg: "exponent too large".into(),
                    })?;
                    match lhs {
                        Scalar(a) => {
                            let mut acc = Rat::one();
                            for _ in 0..e {
                                acc *= &a;
                            }
                            Ok(Scalar(acc))
                        }
                        Graded(g) => {
                            let mut acc = GradedFunction::one(self.ctx.sig);
                            for _ in 0..e {
                                acc = &acc * &g;
                            }
                            Ok(Graded(acc))
                        }
                        Field(_) => perr(line, col, "cannot raise a vector field to a power"),
                    }
                }
                // xi1^xi3 is the odd product
                Graded(g) => {
                    let lg = self.ctx.as_graded(lhs, line, col)?;
                    Ok(Graded(&lg * &g))
                }
                Field(_) => perr(line, col, "cannot use a vector field as an exponent"),
            },
            _ => unreachable!("operator set"),
        }
    }
}

fn eval_expr(toks: &[SpTok], ctx: &ExprCtx) -> Result<Value> {
    let mut p = ExprParser { toks, pos: 0, ctx };
    let v = p.parse(0)?;
    if p.pos != toks.len() {
        let (l, c) = p.here();
        return perr(l, c, "unexpected trailing tokens in expression");
    }
    Ok(v)
}

/// Split a top-level literal list `[a, b, c]` into element token slices.
/// Returns `None` when the value is not a literal list.
fn split_list(toks: &[SpTok]) -> Option<Vec<Vec<SpTok>>> {
    if toks.first().map(|t| &t.tok) != Some(&Tok::LBracket)
        || toks.last().map(|t| &t.tok) != Some(&Tok::RBracket)
    {
        return None;
    }
    let inner = &toks[1..toks.len() - 1];
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, t) in inner.iter().enumerate() {
        match t.tok {
            Tok::LBracket | Tok::LParen => depth += 1,
            Tok::RBracket | Tok::RParen => depth = depth.saturating_sub(1),
            Tok::Comma if depth == 0 => {
                parts.push(inner[start..i].to_vec());
                start = i + 1;
            }
            _ => {}
        }
    }
    if inner.is_empty() {
        return Some(Vec::new());
    }
    parts.push(inner[start..].to_vec());
    Some(parts)
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

/// Raw action data: basis images keyed by `e<i>` (degree 0) and `w<j>`
/// (degree -1); `eta` on pairs of degree 0 indices.
#[derive(Debug, Clone, Default)]
pub struct ActionData {
    pub mu0: BTreeMap<usize, VectorField>,
    pub mu_m1: BTreeMap<usize, VectorField>,
    pub eta: BTreeMap<(usize, usize), VectorField>,
}

#[derive(Debug, Clone)]
pub struct ImfData {
    pub name: Option<String>,
    pub b_sections: Vec<Vec<Poly>>,
    pub f_fields: Vec<Vec<Poly>>,
    /// `(f-generator, row, col) -> entry`, 1-based in the source.
    pub nabla: BTreeMap<(usize, usize, usize), Poly>,
    pub flat_frame: Option<Vec<Vec<Poly>>>,
}

#[derive(Debug, Clone, Default)]
pub struct DocSettings {
    pub mode: Option<String>,
    pub f_coords: Option<Vec<usize>>,
    pub flat_frame: Option<Vec<Vec<Poly>>>,
    pub max_xi_degree: Option<usize>,
    pub max_base_degree: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct NamedDistribution {
    pub name: Option<String>,
    pub generators: Vec<VectorField>,
}

#[derive(Debug, Clone, Default)]
pub struct Document {
    pub signature: Option<Signature>,
    pub algebroid: Option<LieAlgebroidData>,
    pub q_field: Option<VectorField>,
    pub distributions: Vec<NamedDistribution>,
    pub imfoliations: Vec<ImfData>,
    pub lie2: Option<StrictLie2Algebra>,
    pub action: Option<ActionData>,
    pub settings: DocSettings,
}

impl Document {
    /// The homological field of the document: an explicit `q_field`, or the
    /// one built from the algebroid block.
    pub fn resolve_q(&self) -> Result<VectorField> {
        if let Some(q) = &self.q_field {
            return Ok(q.clone());
        }
        if let Some(a) = &self.algebroid {
            return Ok(a.build_q());
        }
        Err(Error::UnresolvedReference(
            "no q_field or algebroid block in the document".into(),
        ))
    }

    pub fn require_signature(&self) -> Result<Signature> {
        self.signature.ok_or_else(|| {
            Error::UnresolvedReference("document has no manifold block".into())
        })
    }
}

fn entry_int(e: &RawEntry) -> Result<i64> {
    let [t] = e.value.as_slice() else {
        return perr(e.line, e.col, "expected an integer");
    };
    match &t.tok {
        Tok::Number(n) => i64::try_from(n).map_err(|_| Error::Parse {
            line: e.line,
            col: e.col,
            msg: "integer too large".into(),
        }),
        _ => perr(e.line, e.col, "expected an integer"),
    }
}

fn entry_rat(e: &RawEntry, ctx: &ExprCtx) -> Result<Rat> {
    match eval_expr(&e.value, ctx)? {
        Value::Scalar(c) => Ok(c),
        Value::Graded(g) if g.is_zero() => Ok(Rat::zero()),
        _ => perr(e.line, e.col, "expected a rational constant"),
    }
}

fn index_1based(arg: &IndexArg, e: &RawEntry, max: usize, what: &str) -> Result<usize> {
    match arg {
        IndexArg::Int(i) if *i >= 1 && (*i as usize) <= max => Ok(*i as usize - 1),
        _ => perr(
            e.line,
            e.col,
            format!("{} index must be in 1..={}", what, max),
        ),
    }
}

/// Parse a document, resolving references and checking signature
/// consistency.
pub fn parse_document(text: &str) -> Result<Document> {
    let blocks = parse_blocks(text)?;
    let mut doc = Document::default();

    // Pass 1: the manifold block fixes the signature.
    for b in blocks.iter().filter(|b| b.kind == "manifold") {
        let mut base = None;
        let mut rank = None;
        for e in &b.entries {
            match e.key.as_str() {
                "base" => base = Some(entry_int(e)? as usize),
                "rank" => rank = Some(entry_int(e)? as usize),
                _ => return perr(e.line, e.col, format!("unknown manifold key '{}'", e.key)),
            }
        }
        let (Some(n), Some(r)) = (base, rank) else {
            return perr(b.line, b.col, "manifold block needs base and rank");
        };
        if r > 63 {
            return perr(b.line, b.col, "at most 63 odd generators are supported");
        }
        if doc.signature.is_some() {
            return perr(b.line, b.col, "duplicate manifold block");
        }
        doc.signature = Some(Signature::new(n, r));
    }

    let sig = doc.signature;
    let need_sig = |b: &RawBlock| -> Result<Signature> {
        sig.ok_or(Error::Parse {
            line: b.line,
            col: b.col,
            msg: "a manifold block must come before this block".into(),
        })
    };

    // Pass 2: algebroid and q_field (no cross references).
    for b in &blocks {
        match b.kind.as_str() {
            "algebroid" => {
                let sig = need_sig(b)?;
                let ctx = ExprCtx { sig, q: None };
                let mut a = LieAlgebroidData::new(sig);
                for e in &b.entries {
                    let value = match eval_expr(&e.value, &ctx)? {
                        Value::Scalar(c) => Poly::constant(sig.n, c),
                        Value::Graded(g) => {
                            if g.max_xi_degree() != 0 {
                                return perr(e.line, e.col, "structure functions are xi-free");
                            }
                            g.coeff(&OddMonomial::unit())
                        }
                        Value::Field(_) => {
                            return perr(e.line, e.col, "expected a polynomial")
                        }
                    };
                    match (e.key.as_str(), e.index_groups.as_slice()) {
                        ("c", [group]) if group.len() == 3 => {
                            let i = index_1based(&group[0], e, sig.r, "frame")?;
                            let j = index_1based(&group[1], e, sig.r, "frame")?;
                            let k = index_1based(&group[2], e, sig.r, "frame")?;
                            if i == j && !value.is_zero() {
                                return perr(e.line, e.col, "c[i,i,k] must vanish");
                            }
                            a.set_c(i, j, k, value);
                        }
                        ("rho", [group]) if group.len() == 2 => {
                            let i = index_1based(&group[0], e, sig.r, "frame")?;
                            let al = index_1based(&group[1], e, sig.n, "coordinate")?;
                            a.set_rho(i, al, value);
                        }
                        _ => {
                            return perr(
                                e.line,
                                e.col,
                                "algebroid entries are c[i,j,k] or rho[i,a]",
                            )
                        }
                    }
                }
                if doc.algebroid.is_some() {
                    return perr(b.line, b.col, "duplicate algebroid block");
                }
                doc.algebroid = Some(a);
            }
            "q_field" => {
                let sig = need_sig(b)?;
                let ctx = ExprCtx { sig, q: None };
                for e in &b.entries {
                    if e.key != "q" {
                        return perr(e.line, e.col, "q_field blocks have a single key 'q'");
                    }
                    let v = eval_expr(&e.value, &ctx)?;
                    let f = ctx.as_field(v, e.line, e.col)?;
                    if doc.q_field.is_some() {
                        return perr(e.line, e.col, "duplicate q entry");
                    }
                    doc.q_field = Some(f);
                }
            }
            _ => {}
        }
    }

    // The remaining blocks may reference Q.
    let q_resolved = doc
        .q_field
        .clone()
        .or_else(|| doc.algebroid.as_ref().map(|a| a.build_q()));

    for b in &blocks {
        match b.kind.as_str() {
            "manifold" | "algebroid" | "q_field" => {}
            "distribution" => {
                let sig = need_sig(b)?;
                let ctx = ExprCtx {
                    sig,
                    q: q_resolved.as_ref(),
                };
                let mut generators = Vec::new();
                for e in &b.entries {
                    if e.key != "gen" {
                        return perr(e.line, e.col, "distribution blocks list 'gen' entries");
                    }
                    let v = eval_expr(&e.value, &ctx)?;
                    generators.push(ctx.as_field(v, e.line, e.col)?);
                }
                doc.distributions.push(NamedDistribution {
                    name: b.name.clone(),
                    generators,
                });
            }
            "imfoliation" => {
                let sig = need_sig(b)?;
                let ctx = ExprCtx {
                    sig,
                    q: q_resolved.as_ref(),
                };
                let mut data = ImfData {
                    name: b.name.clone(),
                    b_sections: Vec::new(),
                    f_fields: Vec::new(),
                    nabla: BTreeMap::new(),
                    flat_frame: None,
                };
                for e in &b.entries {
                    match e.key.as_str() {
                        "B" => data.b_sections = parse_section_list(e, &ctx)?,
                        "F" => data.f_fields = parse_base_field_list(e, &ctx)?,
                        "flat_frame" => data.flat_frame = Some(parse_section_list(e, &ctx)?),
                        "nabla" => {
                            let [g_group, ij_group] = e.index_groups.as_slice() else {
                                return perr(e.line, e.col, "nabla entries look like nabla[g][i,j]");
                            };
                            if g_group.len() != 1 || ij_group.len() != 2 {
                                return perr(e.line, e.col, "nabla entries look like nabla[g][i,j]");
                            }
                            let g = index_1based(&g_group[0], e, usize::MAX >> 1, "F generator")?;
                            let i = index_1based(&ij_group[0], e, sig.r, "frame")?;
                            let j = index_1based(&ij_group[1], e, sig.r, "frame")?;
                            let value = match eval_expr(&e.value, &ctx)? {
                                Value::Scalar(c) => Poly::constant(sig.n, c),
                                Value::Graded(gf) if gf.max_xi_degree() == 0 => {
                                    gf.coeff(&OddMonomial::unit())
                                }
                                _ => return perr(e.line, e.col, "nabla entries are xi-free"),
                            };
                            data.nabla.insert((g, i, j), value);
                        }
                        _ => return perr(e.line, e.col, format!("unknown imfoliation key '{}'", e.key)),
                    }
                }
                doc.imfoliations.push(data);
            }
            "lie2algebra" => {
                let mut dim_m1 = None;
                let mut dim0 = None;
                for e in &b.entries {
                    match e.key.as_str() {
                        "dim_minus1" => dim_m1 = Some(entry_int(e)? as usize),
                        "dim0" => dim0 = Some(entry_int(e)? as usize),
                        _ => {}
                    }
                }
                let (Some(dm), Some(d0)) = (dim_m1, dim0) else {
                    return perr(b.line, b.col, "lie2algebra needs dim_minus1 and dim0");
                };
                let mut l = StrictLie2Algebra::new(dm, d0);
                let scalar_ctx = ExprCtx {
                    sig: Signature::new(0, 0),
                    q: None,
                };
                for e in &b.entries {
                    match (e.key.as_str(), e.index_groups.as_slice()) {
                        ("dim_minus1", _) | ("dim0", _) => {}
                        ("delta", [group]) if group.len() == 2 => {
                            let i = index_1based(&group[0], e, d0, "L_0")?;
                            let j = index_1based(&group[1], e, dm, "L_-1")?;
                            l.set_delta(i, j, entry_rat(e, &scalar_ctx)?);
                        }
                        ("bracket", [group]) if group.len() == 3 => {
                            let i = index_1based(&group[0], e, d0, "L_0")?;
                            let j = index_1based(&group[1], e, d0, "L_0")?;
                            let k = index_1based(&group[2], e, d0, "L_0")?;
                            let value = entry_rat(e, &scalar_ctx)?;
                            if i == j && !value.is_zero() {
                                return perr(e.line, e.col, "bracket[i,i,k] must vanish");
                            }
                            l.set_bracket(i, j, k, value);
                        }
                        ("act", [group]) if group.len() == 3 => {
                            let i = index_1based(&group[0], e, d0, "L_0")?;
                            let j = index_1based(&group[1], e, dm, "L_-1")?;
                            let m = index_1based(&group[2], e, dm, "L_-1")?;
                            l.set_act(i, j, m, entry_rat(e, &scalar_ctx)?);
                        }
                        _ => {
                            return perr(
                                e.line,
                                e.col,
                                "lie2algebra entries are dim_minus1, dim0, delta[i,j], bracket[i,j,k], act[i,j,m]",
                            )
                        }
                    }
                }
                if doc.lie2.is_some() {
                    return perr(b.line, b.col, "duplicate lie2algebra block");
                }
                doc.lie2 = Some(l);
            }
            "action" => {
                let sig = need_sig(b)?;
                let ctx = ExprCtx {
                    sig,
                    q: q_resolved.as_ref(),
                };
                let mut data = ActionData::default();
                let basis_index = |s: &str, e: &RawEntry| -> Result<(char, usize)> {
                    let (kind, rest) = s.split_at(1);
                    match (kind, rest.parse::<usize>()) {
                        ("e", Ok(i)) if i >= 1 => Ok(('e', i - 1)),
                        ("w", Ok(i)) if i >= 1 => Ok(('w', i - 1)),
                        _ => perr(
                            e.line,
                            e.col,
                            "action indices are e<i> (degree 0) or w<j> (degree -1)",
                        ),
                    }
                };
                for e in &b.entries {
                    let v = eval_expr(&e.value, &ctx)?;
                    let f = ctx.as_field(v, e.line, e.col)?;
                    match (e.key.as_str(), e.index_groups.as_slice()) {
                        ("mu", [group]) if group.len() == 1 => match &group[0] {
                            IndexArg::Name(s) => {
                                let (kind, idx) = basis_index(s, e)?;
                                if kind == 'e' {
                                    data.mu0.insert(idx, f);
                                } else {
                                    data.mu_m1.insert(idx, f);
                                }
                            }
                            _ => return perr(e.line, e.col, "mu entries look like mu[e1] or mu[w1]"),
                        },
                        ("eta", [group]) if group.len() == 1 => match &group[0] {
                            IndexArg::Wedge(a, bn) => {
                                let (ka, ia) = basis_index(a, e)?;
                                let (kb, ib) = basis_index(bn, e)?;
                                if ka != 'e' || kb != 'e' {
                                    return perr(e.line, e.col, "eta is indexed by e<i>^e<j>");
                                }
                                data.eta.insert((ia, ib), f);
                            }
                            _ => return perr(e.line, e.col, "eta entries look like eta[e1^e2]"),
                        },
                        _ => return perr(e.line, e.col, "action entries are mu[...] or eta[...]"),
                    }
                }
                if doc.action.is_some() {
                    return perr(b.line, b.col, "duplicate action block");
                }
                doc.action = Some(data);
            }
            "settings" => {
                let ctx_sig = sig.unwrap_or(Signature::new(0, 0));
                let ctx = ExprCtx {
                    sig: ctx_sig,
                    q: None,
                };
                for e in &b.entries {
                    match e.key.as_str() {
                        "mode" => {
                            let [t] = e.value.as_slice() else {
                                return perr(e.line, e.col, "mode is a quoted string");
                            };
                            match &t.tok {
                                Tok::Str(s) => doc.settings.mode = Some(s.clone()),
                                _ => {
                                    return perr(
                                        e.line,
                                        e.col,
                                        "mode is \"point-body\" or \"adapted-chart\"",
                                    )
                                }
                            }
                        }
                        "f_coords" => {
                            let Some(parts) = split_list(&e.value) else {
                                return perr(e.line, e.col, "f_coords is a list like [1, 2]");
                            };
                            let mut coords = Vec::new();
                            for part in parts {
                                let [t] = part.as_slice() else {
                                    return perr(e.line, e.col, "f_coords entries are integers");
                                };
                                match &t.tok {
                                    Tok::Number(nv) => {
                                        let i = i64::try_from(nv).map_err(|_| Error::Parse {
                                            line: e.line,
                                            col: e.col,
                                            msg: "index too large".into(),
                                        })?;
                                        if i < 1 {
                                            return perr(e.line, e.col, "coordinates are 1-based");
                                        }
                                        coords.push(i as usize - 1);
                                    }
                                    _ => return perr(e.line, e.col, "f_coords entries are integers"),
                                }
                            }
                            doc.settings.f_coords = Some(coords);
                        }
                        "flat_frame" => {
                            doc.settings.flat_frame = Some(parse_section_list(e, &ctx)?)
                        }
                        "max_xi_degree" => {
                            doc.settings.max_xi_degree = Some(entry_int(e)? as usize)
                        }
                        "max_base_degree" => {
                            doc.settings.max_base_degree = Some(entry_int(e)? as usize)
                        }
                        _ => return perr(e.line, e.col, format!("unknown settings key '{}'", e.key)),
                    }
                }
            }
            other => return perr(b.line, b.col, format!("unknown block '{}'", other)),
        }
    }

    Ok(doc)
}

/// A list of degree -1 vector field expressions, returned as sections.
fn parse_section_list(e: &RawEntry, ctx: &ExprCtx) -> Result<Vec<Vec<Poly>>> {
    let Some(parts) = split_list(&e.value) else {
        return perr(e.line, e.col, "expected a list like [d/dxi1, d/dxi2]");
    };
    let mut out = Vec::new();
    for part in parts {
        let v = eval_expr(&part, ctx)?;
        let f = ctx.as_field(v, e.line, e.col)?;
        if !f.is_homogeneous_of_degree(-1) {
            return perr(e.line, e.col, "sections are degree -1 fields (d/dxi combinations)");
        }
        out.push(f.section_polys());
    }
    Ok(out)
}

/// A list of base vector field expressions (degree 0, pure symbol).
fn parse_base_field_list(e: &RawEntry, ctx: &ExprCtx) -> Result<Vec<Vec<Poly>>> {
    let Some(parts) = split_list(&e.value) else {
        return perr(e.line, e.col, "expected a list like [d/dx1, x1*d/dx2]");
    };
    let mut out = Vec::new();
    for part in parts {
        let v = eval_expr(&part, ctx)?;
        let f = ctx.as_field(v, e.line, e.col)?;
        if !f.is_homogeneous_of_degree(0) || !f.is_base_field() {
            return perr(e.line, e.col, "F entries are base fields (d/dx combinations)");
        }
        out.push(f.symbol_polys());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Standalone expression entry points
// ---------------------------------------------------------------------------

/// Parse a graded function in the canonical rendering syntax.
pub fn parse_graded_function(text: &str, sig: Signature) -> Result<GradedFunction> {
    let toks = lex(text)?;
    let toks: Vec<SpTok> = toks
        .into_iter()
        .filter(|t| t.tok != Tok::Newline)
        .collect();
    let ctx = ExprCtx { sig, q: None };
    let v = eval_expr(&toks, &ctx)?;
    ctx.as_graded(v, 1, 1)
}

/// Parse a vector field in the canonical rendering syntax.
pub fn parse_vector_field(text: &str, sig: Signature) -> Result<VectorField> {
    parse_vector_field_with_q(text, sig, None)
}

pub fn parse_vector_field_with_q(
    text: &str,
    sig: Signature,
    q: Option<&VectorField>,
) -> Result<VectorField> {
    let toks = lex(text)?;
    let toks: Vec<SpTok> = toks
        .into_iter()
        .filter(|t| t.tok != Tok::Newline)
        .collect();
    let ctx = ExprCtx { sig, q };
    let v = eval_expr(&toks, &ctx)?;
    match v {
        Value::Field(f) => Ok(f),
        Value::Scalar(c) if c.is_zero() => Ok(VectorField::zero(sig)),
        Value::Graded(g) if g.is_zero() => Ok(VectorField::zero(sig)),
        _ => Err(Error::InvalidInput("expected a vector field".into())),
    }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn render_poly_entryable(p: &Poly) -> String {
    p.render()
}

/// Canonical DSL text for an algebroid block.
pub fn render_algebroid(a: &LieAlgebroidData) -> String {
    let sig = a.signature();
    let mut lines = Vec::new();
    for i in 0..sig.r {
        for j in (i + 1)..sig.r {
            for k in 0..sig.r {
                if !a.c(i, j, k).is_zero() {
                    lines.push(format!(
                        "  c[{},{},{}] = {};",
                        i + 1,
                        j + 1,
                        k + 1,
                        render_poly_entryable(a.c(i, j, k))
                    ));
                }
            }
        }
    }
    for i in 0..sig.r {
        for al in 0..sig.n {
            if !a.rho(i, al).is_zero() {
                lines.push(format!(
                    "  rho[{},{}] = {};",
                    i + 1,
                    al + 1,
                    render_poly_entryable(a.rho(i, al))
                ));
            }
        }
    }
    if lines.is_empty() {
        "algebroid {\n}".to_string()
    } else {
        format!("algebroid {{\n{}\n}}", lines.join("\n"))
    }
}

fn render_section_expr(sig: Signature, col: &[Poly]) -> String {
    VectorField::from_section(sig, col).render()
}

fn render_base_expr(sig: Signature, f: &[Poly]) -> String {
    VectorField::from_base_field(sig, f).render()
}

/// Canonical DSL text for a whole document.
pub fn render_document(doc: &Document) -> String {
    let mut out = String::new();
    let sig = doc.signature;
    if let Some(sig) = sig {
        out.push_str(&format!(
            "manifold {{ base = {}; rank = {} }}\n",
            sig.n, sig.r
        ));
    }
    if let Some(a) = &doc.algebroid {
        out.push_str(&render_algebroid(a));
        out.push('\n');
    }
    if let Some(qf) = &doc.q_field {
        out.push_str(&format!("q_field {{ q = {} }}\n", qf.render()));
    }
    for d in &doc.distributions {
        match &d.name {
            Some(n) => out.push_str(&format!("distribution {} {{\n", n)),
            None => out.push_str("distribution {\n"),
        }
        for g in &d.generators {
            out.push_str(&format!("  gen = {};\n", g.render()));
        }
        out.push_str("}\n");
    }
    for imf in &doc.imfoliations {
        let sig = sig.expect("imfoliation blocks require a manifold");
        match &imf.name {
            Some(n) => out.push_str(&format!("imfoliation {} {{\n", n)),
            None => out.push_str("imfoliation {\n"),
        }
        let sections = |cols: &[Vec<Poly>]| {
            cols.iter()
                .map(|c| render_section_expr(sig, c))
                .collect::<Vec<_>>()
                .join(", ")
        };
        out.push_str(&format!("  B = [{}];\n", sections(&imf.b_sections)));
        out.push_str(&format!(
            "  F = [{}];\n",
            imf.f_fields
                .iter()
                .map(|f| render_base_expr(sig, f))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        for ((g, i, j), p) in &imf.nabla {
            if !p.is_zero() {
                out.push_str(&format!(
                    "  nabla[{}][{},{}] = {};\n",
                    g + 1,
                    i + 1,
                    j + 1,
                    p.render()
                ));
            }
        }
        if let Some(frame) = &imf.flat_frame {
            out.push_str(&format!("  flat_frame = [{}];\n", sections(frame)));
        }
        out.push_str("}\n");
    }
    if let Some(l) = &doc.lie2 {
        let mut lines = vec![
            format!("  dim_minus1 = {};", l.dim_m1()),
            format!("  dim0 = {};", l.dim0()),
        ];
        for i in 0..l.dim0() {
            for j in 0..l.dim_m1() {
                if !l.delta(i, j).is_zero() {
                    lines.push(format!("  delta[{},{}] = {};", i + 1, j + 1, render_rat(l.delta(i, j))));
                }
            }
        }
        for i in 0..l.dim0() {
            for j in (i + 1)..l.dim0() {
                for k in 0..l.dim0() {
                    if !l.bracket(i, j, k).is_zero() {
                        lines.push(format!(
                            "  bracket[{},{},{}] = {};",
                            i + 1,
                            j + 1,
                            k + 1,
                            render_rat(l.bracket(i, j, k))
                        ));
                    }
                }
            }
        }
        for i in 0..l.dim0() {
            for j in 0..l.dim_m1() {
                for m in 0..l.dim_m1() {
                    if !l.act(i, j, m).is_zero() {
                        lines.push(format!(
                            "  act[{},{},{}] = {};",
                            i + 1,
                            j + 1,
                            m + 1,
                            render_rat(l.act(i, j, m))
                        ));
                    }
                }
            }
        }
        out.push_str(&format!("lie2algebra {{\n{}\n}}\n", lines.join("\n")));
    }
    if let Some(act) = &doc.action {
        out.push_str("action {\n");
        for (j, v) in &act.mu_m1 {
            out.push_str(&format!("  mu[w{}] = {};\n", j + 1, v.render()));
        }
        for (i, v) in &act.mu0 {
            out.push_str(&format!("  mu[e{}] = {};\n", i + 1, v.render()));
        }
        for ((i, j), v) in &act.eta {
            out.push_str(&format!("  eta[e{}^e{}] = {};\n", i + 1, j + 1, v.render()));
        }
        out.push_str("}\n");
    }
    let s = &doc.settings;
    if s.mode.is_some()
        || s.f_coords.is_some()
        || s.flat_frame.is_some()
        || s.max_xi_degree.is_some()
        || s.max_base_degree.is_some()
    {
        let mut parts: Vec<String> = Vec::new();
        if let Some(m) = &s.mode {
            parts.push(format!("mode = \"{}\"", m));
        }
        if let Some(coords) = &s.f_coords {
            parts.push(format!(
                "f_coords = [{}]",
                coords
                    .iter()
                    .map(|c| (c + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        if let Some(frame) = &s.flat_frame {
            let sig = sig.expect("settings flat_frame requires a manifold");
            parts.push(format!(
                "flat_frame = [{}]",
                frame
                    .iter()
                    .map(|c| render_section_expr(sig, c))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        }
        if let Some(k) = s.max_xi_degree {
            parts.push(format!("max_xi_degree = {}", k));
        }
        if let Some(k) = s.max_base_degree {
            parts.push(format!("max_base_degree = {}", k));
        }
        out.push_str(&format!("settings {{ {} }}\n", parts.join("; ")));
    }
    out
}
