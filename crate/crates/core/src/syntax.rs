//! Surface syntax for types, terms, equations and signatures.
//!
//! Type annotations on `id`, `final`, `pi1`, `pi2`, `inv_pi1` and `permut`
//! are optional; missing ones are inferred by unification. The grammar is
//! described in `docs/format.md`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::derived;
use crate::kernel::{Equation, Mode};
use crate::memory::{Loc, MemorySignature, SignatureError, Value};
use crate::terms::{ObjTy, Term, TermError};

/// 1-based position of the first character of a token.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    TypeMismatch,
    Ambiguous,
    UnknownName,
    UnknownLocation,
    Signature,
}

impl ParseErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::Syntax => "ParseError",
            ParseErrorKind::TypeMismatch => "TypeMismatch",
            ParseErrorKind::Ambiguous => "AmbiguousType",
            ParseErrorKind::UnknownName => "UnknownName",
            ParseErrorKind::UnknownLocation => "UnknownLocation",
            ParseErrorKind::Signature => "SignatureError",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, span: Span, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            span,
            message: message.into(),
        }
    }
}

// ---------------------------------------------------------------- lexer

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Star,
    Colon,
    ColonEq,
    Eq,
    EqEq,
    Tilde,
    Arrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Star => "`*`",
            Tok::Colon => "`:`",
            Tok::ColonEq => "`:=`",
            Tok::Eq => "`=`",
            Tok::EqEq => "`==`",
            Tok::Tilde => "`~`",
            Tok::Arrow => "`->`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '\''
}

pub(crate) fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                bump(&mut chars);
            }
            continue;
        }
        if ident_char(c) {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !ident_char(c) {
                    break;
                }
                s.push(c);
                bump(&mut chars);
            }
            out.push((Tok::Ident(s), span));
            continue;
        }
        bump(&mut chars);
        let tok = match c {
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            ',' => Tok::Comma,
            '*' | '×' => Tok::Star,
            '~' | '≈' => Tok::Tilde,
            '≍' => Tok::EqEq,
            '∘' => Tok::Ident("o".to_string()),
            ':' if chars.peek() == Some(&'=') => {
                bump(&mut chars);
                Tok::ColonEq
            }
            ':' => Tok::Colon,
            '=' if chars.peek() == Some(&'=') => {
                bump(&mut chars);
                Tok::EqEq
            }
            '=' => Tok::Eq,
            '-' if chars.peek() == Some(&'>') => {
                bump(&mut chars);
                Tok::Arrow
            }
            '→' => Tok::Arrow,
            other => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    span,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        out.push((tok, span));
    }
    out.push((Tok::Eof, Span { line, col }));
    Ok(out)
}

// ---------------------------------------------------------------- surface AST

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum TyAst {
    Unit,
    Val(String, Span),
    Prod(Box<TyAst>, Box<TyAst>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Leaf {
    Id,
    Final,
    Pi1,
    Pi2,
    InvPi1,
    Permut,
}

impl Leaf {
    fn from_name(s: &str) -> Option<(Leaf, usize)> {
        Some(match s {
            "id" => (Leaf::Id, 1),
            "final" => (Leaf::Final, 1),
            "pi1" => (Leaf::Pi1, 2),
            "pi2" => (Leaf::Pi2, 2),
            "inv_pi1" => (Leaf::InvPi1, 1),
            "permut" => (Leaf::Permut, 2),
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Binary {
    Pair,
    PermPair,
    Prod,
    PermProd,
    LeftSeq,
    RightSeq,
}

impl Binary {
    fn from_name(s: &str) -> Option<Binary> {
        Some(match s {
            "pair" => Binary::Pair,
            "perm_pair" => Binary::PermPair,
            "prod" => Binary::Prod,
            "perm_prod" => Binary::PermProd,
            "left_seq_prod" => Binary::LeftSeq,
            "right_seq_prod" => Binary::RightSeq,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum TermAst {
    Leaf(Leaf, Vec<TyAst>, Span),
    Lookup(String, Span),
    Update(String, Span),
    Comp(Box<TermAst>, Box<TermAst>, Span),
    Binary(Binary, Box<TermAst>, Box<TermAst>, Span),
    Name(String, Span),
    /// `(t : dom -> cod)`
    Ascribe(Box<TermAst>, TyAst, TyAst, Span),
}

impl TermAst {
    fn span(&self) -> Span {
        match self {
            TermAst::Leaf(_, _, s)
            | TermAst::Lookup(_, s)
            | TermAst::Update(_, s)
            | TermAst::Comp(_, _, s)
            | TermAst::Binary(_, _, _, s)
            | TermAst::Name(_, s)
            | TermAst::Ascribe(_, _, _, s) => *s,
        }
    }

    fn collect_locations(&self, out: &mut BTreeSet<String>) {
        fn ty(t: &TyAst, out: &mut BTreeSet<String>) {
            match t {
                TyAst::Unit => {}
                TyAst::Val(l, _) => {
                    out.insert(l.clone());
                }
                TyAst::Prod(a, b) => {
                    ty(a, out);
                    ty(b, out);
                }
            }
        }
        match self {
            TermAst::Leaf(_, tys, _) => tys.iter().for_each(|t| ty(t, out)),
            TermAst::Lookup(l, _) | TermAst::Update(l, _) => {
                out.insert(l.clone());
            }
            TermAst::Comp(a, b, _) | TermAst::Binary(_, a, b, _) => {
                a.collect_locations(out);
                b.collect_locations(out);
            }
            TermAst::Name(..) => {}
            TermAst::Ascribe(t, d, c, _) => {
                t.collect_locations(out);
                ty(d, out);
                ty(c, out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct EqAst {
    pub lhs: TermAst,
    pub rhs: TermAst,
    pub mode: Mode,
    pub span: Span,
}

/// Words that start an item in a file and so cannot name a `let` binding.
pub(crate) const ITEM_KEYWORDS: &[&str] =
    &["locations", "let", "name", "goal", "lemma", "proof", "expect"];

fn reserved(s: &str) -> bool {
    ITEM_KEYWORDS.contains(&s)
        || s == "o"
        || s == "lookup"
        || s == "update"
        || Leaf::from_name(s).is_some()
        || Binary::from_name(s).is_some()
}

// ---------------------------------------------------------------- parser

pub(crate) struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    pub(crate) fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    pub(crate) fn peek_at(&self, n: usize) -> &Tok {
        let ix = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[ix].0
    }

    pub(crate) fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    pub(crate) fn next(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn at_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == word)
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(ParseErrorKind::Syntax, self.span(), msg)
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.next().1)
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.peek())))
        }
    }

    pub(crate) fn ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.next().1;
                Ok((s, span))
            }
            other => Err(self.error(format!("expected {what}, found {other}"))),
        }
    }

    pub(crate) fn keyword(&mut self, word: &str) -> Result<Span, ParseError> {
        if self.at_ident(word) {
            Ok(self.next().1)
        } else {
            Err(self.error(format!("expected `{word}`, found {}", self.peek())))
        }
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", self.peek())))
        }
    }

    pub(crate) fn ty(&mut self) -> Result<TyAst, ParseError> {
        let mut left = self.ty_atom()?;
        while *self.peek() == Tok::Star {
            self.next();
            let right = self.ty_atom()?;
            left = TyAst::Prod(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn ty_atom(&mut self) -> Result<TyAst, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) if s == "unit" => {
                self.next();
                Ok(TyAst::Unit)
            }
            Tok::Ident(s) if s == "V" => {
                self.next();
                self.expect(Tok::LParen)?;
                let (loc, span) = self.ident("a location")?;
                self.expect(Tok::RParen)?;
                Ok(TyAst::Val(loc, span))
            }
            other => Err(self.error(format!("expected a type, found {other}"))),
        }
    }

    /// `atom ('o' term)?`, so composition associates to the right.
    pub(crate) fn term(&mut self) -> Result<TermAst, ParseError> {
        let left = self.term_atom()?;
        if self.at_ident("o") {
            let span = self.next().1;
            let right = self.term()?;
            return Ok(TermAst::Comp(Box::new(left), Box::new(right), span));
        }
        Ok(left)
    }

    fn term_atom(&mut self) -> Result<TermAst, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                let t = self.term()?;
                if *self.peek() == Tok::Colon {
                    self.next();
                    let dom = self.ty()?;
                    self.expect(Tok::Arrow)?;
                    let cod = self.ty()?;
                    self.expect(Tok::RParen)?;
                    return Ok(TermAst::Ascribe(Box::new(t), dom, cod, span));
                }
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(s) => {
                self.next();
                if let Some((leaf, arity)) = Leaf::from_name(&s) {
                    let mut tys = Vec::new();
                    if *self.peek() == Tok::LBracket {
                        self.next();
                        tys.push(self.ty()?);
                        while *self.peek() == Tok::Comma {
                            self.next();
                            tys.push(self.ty()?);
                        }
                        self.expect(Tok::RBracket)?;
                        if tys.len() != arity {
                            return Err(ParseError::new(
                                ParseErrorKind::Syntax,
                                span,
                                format!("`{s}` takes {arity} type argument(s), got {}", tys.len()),
                            ));
                        }
                    }
                    return Ok(TermAst::Leaf(leaf, tys, span));
                }
                if let Some(bin) = Binary::from_name(&s) {
                    self.expect(Tok::LParen)?;
                    let a = self.term()?;
                    self.expect(Tok::Comma)?;
                    let b = self.term()?;
                    self.expect(Tok::RParen)?;
                    return Ok(TermAst::Binary(bin, Box::new(a), Box::new(b), span));
                }
                match s.as_str() {
                    "lookup" => Ok(TermAst::Lookup(self.ident("a location")?.0, span)),
                    "update" => Ok(TermAst::Update(self.ident("a location")?.0, span)),
                    _ if reserved(&s) => Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        span,
                        format!("expected a term, found keyword `{s}`"),
                    )),
                    _ => Ok(TermAst::Name(s, span)),
                }
            }
            other => Err(self.error(format!("expected a term, found {other}"))),
        }
    }

    pub(crate) fn equation(&mut self) -> Result<EqAst, ParseError> {
        let lhs = self.term()?;
        let span = self.span();
        let mode = match self.peek() {
            Tok::EqEq => Mode::Strong,
            Tok::Tilde => Mode::Weak,
            other => return Err(self.error(format!("expected `==` or `~`, found {other}"))),
        };
        self.next();
        let rhs = self.term()?;
        Ok(EqAst { lhs, rhs, mode, span })
    }

    /// The body of a `locations` item: `loc:{v,...}` entries.
    pub(crate) fn signature_body(&mut self, start: Span) -> Result<MemorySignature, ParseError> {
        let mut entries: Vec<(String, Vec<String>)> = Vec::new();
        while matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Colon {
            let (loc, _) = self.ident("a location")?;
            self.expect(Tok::Colon)?;
            self.expect(Tok::LBrace)?;
            let mut carrier = vec![self.ident("a value")?.0];
            while *self.peek() == Tok::Comma {
                self.next();
                carrier.push(self.ident("a value")?.0);
            }
            self.expect(Tok::RBrace)?;
            entries.push((loc, carrier));
        }
        MemorySignature::from_pairs(entries).map_err(|e| sig_error(start, e))
    }

    /// `let name = term`, after the keyword.
    pub(crate) fn let_body(&mut self) -> Result<(String, Span, TermAst), ParseError> {
        let (name, span) = self.ident("a name")?;
        if reserved(&name) {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                span,
                format!("`{name}` is reserved"),
            ));
        }
        self.expect(Tok::Eq)?;
        Ok((name, span, self.term()?))
    }
}

fn sig_error(span: Span, e: SignatureError) -> ParseError {
    ParseError::new(ParseErrorKind::Signature, span, e.to_string())
}

// ---------------------------------------------------------------- inference

#[derive(Clone, Debug)]
enum ITy {
    Var(usize),
    Unit,
    Val(Loc),
    Prod(Box<ITy>, Box<ITy>),
}

impl ITy {
    fn prod(a: ITy, b: ITy) -> ITy {
        ITy::Prod(Box::new(a), Box::new(b))
    }

    fn from_obj(t: &ObjTy) -> ITy {
        match t {
            ObjTy::Unit => ITy::Unit,
            ObjTy::Val(l) => ITy::Val(l.clone()),
            ObjTy::Prod(a, b) => ITy::prod(ITy::from_obj(a), ITy::from_obj(b)),
        }
    }
}

/// Typed skeleton produced by the first pass: every node's domain and
/// codomain, possibly containing unresolved variables.
struct Typed<'a> {
    ast: &'a TermAst,
    dom: ITy,
    cod: ITy,
    kids: Vec<Typed<'a>>,
}

#[derive(Default)]
struct Infer {
    subst: Vec<Option<ITy>>,
}

impl Infer {
    fn fresh(&mut self) -> ITy {
        self.subst.push(None);
        ITy::Var(self.subst.len() - 1)
    }

    fn shallow(&self, t: &ITy) -> ITy {
        let mut t = t.clone();
        while let ITy::Var(v) = t {
            match &self.subst[v] {
                Some(u) => t = u.clone(),
                None => break,
            }
        }
        t
    }

    fn occurs(&self, v: usize, t: &ITy) -> bool {
        match self.shallow(t) {
            ITy::Var(u) => u == v,
            ITy::Prod(a, b) => self.occurs(v, &a) || self.occurs(v, &b),
            _ => false,
        }
    }

    fn show(&self, t: &ITy) -> String {
        match self.shallow(t) {
            ITy::Var(v) => format!("?{v}"),
            ITy::Unit => "unit".to_string(),
            ITy::Val(l) => format!("V({l})"),
            ITy::Prod(a, b) => {
                let side = |x: &ITy| match self.shallow(x) {
                    ITy::Prod(..) => format!("({})", self.show(x)),
                    _ => self.show(x),
                };
                format!("{}*{}", side(&a), side(&b))
            }
        }
    }

    fn unify(&mut self, a: &ITy, b: &ITy, span: Span, what: &str) -> Result<(), ParseError> {
        let (a, b) = (self.shallow(a), self.shallow(b));
        let clash = |me: &Self| {
            ParseError::new(
                ParseErrorKind::TypeMismatch,
                span,
                format!("type mismatch in {what}: {} vs {}", me.show(&a), me.show(&b)),
            )
        };
        match (&a, &b) {
            (ITy::Var(x), ITy::Var(y)) if x == y => Ok(()),
            (ITy::Var(x), t) | (t, ITy::Var(x)) => {
                if self.occurs(*x, t) {
                    return Err(clash(self));
                }
                self.subst[*x] = Some(t.clone());
                Ok(())
            }
            (ITy::Unit, ITy::Unit) => Ok(()),
            (ITy::Val(l), ITy::Val(m)) if l == m => Ok(()),
            (ITy::Prod(a1, a2), ITy::Prod(b1, b2)) => {
                self.unify(a1, b1, span, what)?;
                self.unify(a2, b2, span, what)
            }
            _ => Err(clash(self)),
        }
    }

    fn resolve(&self, t: &ITy, default_unit: bool) -> Option<ObjTy> {
        match self.shallow(t) {
            ITy::Var(_) => default_unit.then_some(ObjTy::Unit),
            ITy::Unit => Some(ObjTy::Unit),
            ITy::Val(l) => Some(ObjTy::Val(l)),
            ITy::Prod(a, b) => Some(ObjTy::prod(
                self.resolve(&a, default_unit)?,
                self.resolve(&b, default_unit)?,
            )),
        }
    }
}

/// Elaborates surface terms against a signature and a `let` environment.
pub struct Elaborator<'s> {
    sig: &'s MemorySignature,
    env: HashMap<String, Term>,
    /// Resolve leftover type variables to `unit` instead of failing.
    pub default_unit: bool,
}

impl<'s> Elaborator<'s> {
    pub fn new(sig: &'s MemorySignature) -> Self {
        Elaborator {
            sig,
            env: HashMap::new(),
            default_unit: false,
        }
    }

    pub fn signature(&self) -> &MemorySignature {
        self.sig
    }

    pub fn bind(&mut self, name: impl Into<String>, t: Term) {
        self.env.insert(name.into(), t);
    }

    pub fn lookup_name(&self, name: &str) -> Option<&Term> {
        self.env.get(name)
    }

    fn loc(&self, name: &str, span: Span) -> Result<Loc, ParseError> {
        let l = Loc::new(name);
        if self.sig.contains(&l) {
            Ok(l)
        } else {
            Err(ParseError::new(
                ParseErrorKind::UnknownLocation,
                span,
                format!("unknown location `{name}`"),
            ))
        }
    }

    fn ty(&self, t: &TyAst) -> Result<ITy, ParseError> {
        Ok(match t {
            TyAst::Unit => ITy::Unit,
            TyAst::Val(l, span) => ITy::Val(self.loc(l, *span)?),
            TyAst::Prod(a, b) => ITy::prod(self.ty(a)?, self.ty(b)?),
        })
    }

    fn infer<'a>(&self, inf: &mut Infer, ast: &'a TermAst) -> Result<Typed<'a>, ParseError> {
        let leaf = |dom, cod| Typed {
            ast,
            dom,
            cod,
            kids: vec![],
        };
        Ok(match ast {
            TermAst::Leaf(kind, tys, _) => {
                let mut args = Vec::new();
                for t in tys {
                    args.push(self.ty(t)?);
                }
                let arity = if matches!(kind, Leaf::Pi1 | Leaf::Pi2 | Leaf::Permut) { 2 } else { 1 };
                while args.len() < arity {
                    args.push(inf.fresh());
                }
                let x = args[0].clone();
                match kind {
                    Leaf::Id => leaf(x.clone(), x),
                    Leaf::Final => leaf(x, ITy::Unit),
                    Leaf::Pi1 => leaf(ITy::prod(x.clone(), args[1].clone()), x),
                    Leaf::Pi2 => leaf(ITy::prod(x, args[1].clone()), args[1].clone()),
                    Leaf::InvPi1 => leaf(x.clone(), ITy::prod(x, ITy::Unit)),
                    Leaf::Permut => leaf(
                        ITy::prod(x.clone(), args[1].clone()),
                        ITy::prod(args[1].clone(), x),
                    ),
                }
            }
            TermAst::Lookup(l, span) => leaf(ITy::Unit, ITy::Val(self.loc(l, *span)?)),
            TermAst::Update(l, span) => leaf(ITy::Val(self.loc(l, *span)?), ITy::Unit),
            TermAst::Name(n, span) => {
                let t = self.env.get(n).ok_or_else(|| {
                    ParseError::new(ParseErrorKind::UnknownName, *span, format!("unknown name `{n}`"))
                })?;
                leaf(ITy::from_obj(t.dom()), ITy::from_obj(t.cod()))
            }
            TermAst::Comp(g, f, span) => {
                let (tg, tf) = (self.infer(inf, g)?, self.infer(inf, f)?);
                inf.unify(&tf.cod, &tg.dom, *span, "composition `g o f` (cod f vs dom g)")?;
                Typed {
                    ast,
                    dom: tf.dom.clone(),
                    cod: tg.cod.clone(),
                    kids: vec![tg, tf],
                }
            }
            TermAst::Ascribe(t, d, c, span) => {
                let inner = self.infer(inf, t)?;
                inf.unify(&inner.dom, &self.ty(d)?, *span, "annotation (domain)")?;
                inf.unify(&inner.cod, &self.ty(c)?, *span, "annotation (codomain)")?;
                Typed {
                    ast,
                    dom: inner.dom.clone(),
                    cod: inner.cod.clone(),
                    kids: vec![inner],
                }
            }
            TermAst::Binary(bin, a, b, span) => {
                let (ta, tb) = (self.infer(inf, a)?, self.infer(inf, b)?);
                let (dom, cod) = match bin {
                    Binary::Pair | Binary::PermPair => {
                        inf.unify(&ta.dom, &tb.dom, *span, "pair (domains)")?;
                        (ta.dom.clone(), ITy::prod(ta.cod.clone(), tb.cod.clone()))
                    }
                    Binary::Prod | Binary::PermProd | Binary::LeftSeq | Binary::RightSeq => (
                        ITy::prod(ta.dom.clone(), tb.dom.clone()),
                        ITy::prod(ta.cod.clone(), tb.cod.clone()),
                    ),
                };
                Typed {
                    ast,
                    dom,
                    cod,
                    kids: vec![ta, tb],
                }
            }
        })
    }

    fn build(&self, inf: &Infer, node: &Typed<'_>) -> Result<Term, ParseError> {
        let span = node.ast.span();
        let resolve = |t: &ITy| {
            inf.resolve(t, self.default_unit).ok_or_else(|| {
                ParseError::new(
                    ParseErrorKind::Ambiguous,
                    span,
                    format!("cannot infer the type {}; add an annotation", inf.show(t)),
                )
            })
        };
        let mismatch = |e: TermError| ParseError::new(ParseErrorKind::TypeMismatch, span, e.to_string());
        let sig = self.sig;
        match node.ast {
            TermAst::Leaf(kind, _, _) => {
                let dom = resolve(&node.dom)?;
                let pieces = || dom.as_prod().map(|(a, b)| (a.clone(), b.clone())).expect("product domain");
                match kind {
                    Leaf::Id => Term::id(sig, dom),
                    Leaf::Final => Term::final_(sig, dom),
                    Leaf::Pi1 => {
                        let (a, b) = pieces();
                        Term::pi1(sig, a, b)
                    }
                    Leaf::Pi2 => {
                        let (a, b) = pieces();
                        Term::pi2(sig, a, b)
                    }
                    Leaf::InvPi1 => derived::inv_pi1(sig, &dom),
                    Leaf::Permut => {
                        let (a, b) = pieces();
                        derived::permut(sig, &a, &b)
                    }
                }
                .map_err(mismatch)
            }
            TermAst::Lookup(l, s) => Term::lookup(sig, &self.loc(l, *s)?).map_err(mismatch),
            TermAst::Update(l, s) => Term::update(sig, &self.loc(l, *s)?).map_err(mismatch),
            TermAst::Name(n, _) => Ok(self.env[n].clone()),
            TermAst::Ascribe(..) => self.build(inf, &node.kids[0]),
            TermAst::Comp(..) => {
                let g = self.build(inf, &node.kids[0])?;
                let f = self.build(inf, &node.kids[1])?;
                Term::comp(&g, &f).map_err(mismatch)
            }
            TermAst::Binary(bin, ..) => {
                let a = self.build(inf, &node.kids[0])?;
                let b = self.build(inf, &node.kids[1])?;
                match bin {
                    Binary::Pair => Term::pair(&a, &b),
                    Binary::PermPair => derived::perm_pair(sig, &a, &b),
                    Binary::Prod => derived::prod(sig, &a, &b),
                    Binary::PermProd => derived::perm_prod(sig, &a, &b),
                    Binary::LeftSeq => derived::left_seq_prod(sig, &a, &b),
                    Binary::RightSeq => derived::right_seq_prod(sig, &a, &b),
                }
                .map_err(mismatch)
            }
        }
    }

    pub(crate) fn term(&self, ast: &TermAst) -> Result<Term, ParseError> {
        let mut inf = Infer::default();
        let typed = self.infer(&mut inf, ast)?;
        self.build(&inf, &typed)
    }

    pub(crate) fn equation(&self, ast: &EqAst) -> Result<Equation, ParseError> {
        let mut inf = Infer::default();
        let l = self.infer(&mut inf, &ast.lhs)?;
        let r = self.infer(&mut inf, &ast.rhs)?;
        inf.unify(&l.dom, &r.dom, ast.span, "equation (domains)")?;
        inf.unify(&l.cod, &r.cod, ast.span, "equation (codomains)")?;
        let (lhs, rhs) = (self.build(&inf, &l)?, self.build(&inf, &r)?);
        Equation::new(lhs, rhs, ast.mode)
            .map_err(|e| ParseError::new(ParseErrorKind::TypeMismatch, ast.span, e.to_string()))
    }

    /// Elaborates `let name = term` and binds the result.
    pub(crate) fn define(&mut self, name: &str, span: Span, ast: &TermAst) -> Result<(), ParseError> {
        if self.env.contains_key(name) {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                span,
                format!("`{name}` is already defined"),
            ));
        }
        let t = self.term(ast)?;
        self.env.insert(name.to_string(), t);
        Ok(())
    }
}

// ---------------------------------------------------------------- entry points

/// Parses a signature such as `locations i:{0,1} j:{0,1}`.
pub fn parse_signature(src: &str) -> Result<MemorySignature, ParseError> {
    let mut p = Parser::new(src)?;
    let start = p.keyword("locations")?;
    let sig = p.signature_body(start)?;
    p.finish()?;
    Ok(sig)
}

pub fn parse_type(src: &str, sig: &MemorySignature) -> Result<ObjTy, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    p.finish()?;
    let el = Elaborator::new(sig);
    let inf = Infer::default();
    Ok(inf.resolve(&el.ty(&t)?, false).expect("annotations are ground"))
}

pub fn parse_term(src: &str, sig: &MemorySignature) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    p.finish()?;
    Elaborator::new(sig).term(&t)
}

pub fn parse_equation(src: &str, sig: &MemorySignature) -> Result<Equation, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.equation()?;
    p.finish()?;
    Elaborator::new(sig).equation(&e)
}

/// Signature with carrier `{0,1}` for each location, in name order.
pub fn implicit_signature<'a>(locs: impl IntoIterator<Item = &'a str>) -> MemorySignature {
    let names: BTreeSet<&str> = locs.into_iter().collect();
    MemorySignature::from_pairs(names.into_iter().map(|l| (l, [Value::new("0"), Value::new("1")])))
        .expect("distinct names and values")
}

/// Body of a term or equation file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FileBody {
    Term(Term),
    Equation(Equation),
}

/// A parsed term or equation file: optional `locations` line, `let`
/// definitions, then one term or equation.
#[derive(Clone, Debug)]
pub struct TermFile {
    pub signature: MemorySignature,
    pub body: FileBody,
}

/// Parses a term or equation file.
///
/// The signature is `sig` if given, else the file's `locations` line, else
/// (only with `implicit`) one built from the locations the file mentions.
/// With `implicit` leftover type variables default to `unit`, which is
/// harmless for kind inference.
pub fn parse_file(
    src: &str,
    sig: Option<&MemorySignature>,
    implicit: bool,
) -> Result<TermFile, ParseError> {
    let mut p = Parser::new(src)?;
    let mut inline = None;
    let mut lets = Vec::new();
    loop {
        if p.at_ident("locations") {
            let start = p.next().1;
            if inline.is_some() {
                return Err(ParseError::new(ParseErrorKind::Syntax, start, "duplicate `locations`"));
            }
            inline = Some(p.signature_body(start)?);
        } else if p.at_ident("let") {
            p.next();
            lets.push(p.let_body()?);
        } else {
            break;
        }
    }
    let lhs = p.term()?;
    let eq = match p.peek() {
        Tok::EqEq | Tok::Tilde => {
            let span = p.span();
            let mode = if *p.peek() == Tok::EqEq { Mode::Strong } else { Mode::Weak };
            p.next();
            Some(EqAst {
                lhs: lhs.clone(),
                rhs: p.term()?,
                mode,
                span,
            })
        }
        _ => None,
    };
    p.finish()?;

    let signature = match (sig, inline) {
        (Some(s), _) => s.clone(),
        (None, Some(s)) => s,
        (None, None) if implicit => {
            let mut names = BTreeSet::new();
            lhs.collect_locations(&mut names);
            if let Some(e) = &eq {
                e.rhs.collect_locations(&mut names);
            }
            for (_, _, t) in &lets {
                t.collect_locations(&mut names);
            }
            implicit_signature(names.iter().map(String::as_str))
        }
        (None, None) => {
            return Err(ParseError::new(
                ParseErrorKind::Signature,
                Span { line: 1, col: 1 },
                "no signature: pass --signature or add a `locations` line",
            ))
        }
    };
    let mut el = Elaborator::new(&signature);
    el.default_unit = implicit;
    for (name, span, t) in &lets {
        el.define(name, *span, t)?;
    }
    let body = match eq {
        Some(e) => FileBody::Equation(el.equation(&e)?),
        None => FileBody::Term(el.term(&lhs)?),
    };
    Ok(TermFile { signature, body })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decorations::{infer_kind, Kind};

    fn sig() -> MemorySignature {
        parse_signature("locations i:{0,1} j:{0,1}").unwrap()
    }

    #[test]
    fn signature_round_trip() {
        let s = sig();
        assert_eq!(s.to_string(), "locations i:{0,1} j:{0,1}");
        assert_eq!(parse_signature(&s.to_string()).unwrap(), s);
        let e = parse_signature("locations i:{0,0}").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Signature);
    }

    #[test]
    fn composition_is_right_associative() {
        let s = sig();
        let t = parse_term("final[V(j)] o lookup j o update i", &s).unwrap();
        assert_eq!(t.to_string(), "final[V(j)] o lookup j o update i");
        let u = parse_term("(final o lookup j) o update i", &s).unwrap();
        assert_eq!(u.to_string(), "(final[V(j)] o lookup j) o update i");
        assert_ne!(t, u);
    }

    #[test]
    fn annotations_are_inferred() {
        let s = sig();
        let a = parse_term("pi1 o pair(id, final) o lookup j", &s).unwrap();
        let b = parse_term("pi1[V(j),unit] o pair(id[V(j)], final[V(j)]) o lookup j", &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ill_typed_pi1_after_final() {
        let s = sig();
        let e = parse_term("pi1 o final", &s).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::TypeMismatch);
        assert_eq!(e.span, Span { line: 1, col: 5 });
    }

    #[test]
    fn ambiguity_is_reported() {
        let s = sig();
        assert_eq!(parse_term("id", &s).unwrap_err().kind, ParseErrorKind::Ambiguous);
        let f = parse_file("final", None, true).unwrap();
        match f.body {
            FileBody::Term(t) => assert_eq!(t.to_string(), "final[unit]"),
            _ => panic!(),
        }
    }

    #[test]
    fn unknown_location() {
        let s = sig();
        assert_eq!(
            parse_term("lookup k", &s).unwrap_err().kind,
            ParseErrorKind::UnknownLocation
        );
    }

    #[test]
    fn equations_unify_both_sides() {
        let s = sig();
        let e = parse_equation("lookup i o update i ~ id", &s).unwrap();
        assert_eq!(e.to_string(), "lookup i o update i ~ id[V(i)]");
        assert_eq!(e.mode(), Mode::Weak);
    }

    #[test]
    fn files_with_lets() {
        let src = "locations i:{0,1} j:{0,1}\n# comment\nlet U = update i\nlet L = lookup j\nL o U\n";
        let f = parse_file(src, None, false).unwrap();
        match f.body {
            FileBody::Term(t) => assert_eq!(infer_kind(&t), Kind::Rw),
            _ => panic!(),
        }
    }

    #[test]
    fn implicit_signature_from_mentions() {
        let f = parse_file("lookup j o update i", None, true).unwrap();
        assert_eq!(f.signature.to_string(), "locations i:{0,1} j:{0,1}");
    }

    #[test]
    fn derived_forms_parse() {
        let s = sig();
        let t = parse_term("left_seq_prod(update i, lookup j)", &s).unwrap();
        assert_eq!(t, derived::left_seq_prod(
            &s,
            &Term::update(&s, &Loc::new("i")).unwrap(),
            &Term::lookup(&s, &Loc::new("j")).unwrap(),
        ).unwrap());
        parse_term("pi2 o perm_prod(update i, id[V(j)]) o prod(id[V(i)], lookup j) o inv_pi1", &s).unwrap();
    }

    #[test]
    fn unicode_operators() {
        let s = sig();
        let e = parse_equation("lookup i ∘ update i ≈ id", &s).unwrap();
        assert_eq!(e.mode(), Mode::Weak);
    }

    #[test]
    fn ascriptions_fix_types() {
        let s = sig();
        let t = parse_term("(final : V(i)*V(j) -> unit)", &s).unwrap();
        assert_eq!(t.dom(), &ObjTy::prod(ObjTy::val("i"), ObjTy::val("j")));
        let u = parse_term("pi1 o (id : V(j)*unit → V(j)*unit)", &s).unwrap();
        assert_eq!(u.cod(), &ObjTy::val("j"));
        let e = parse_term("(update i : V(j) -> unit)", &s).unwrap_err();
        assert_eq!((e.kind, e.span), (ParseErrorKind::TypeMismatch, Span { line: 1, col: 1 }));
    }
}
