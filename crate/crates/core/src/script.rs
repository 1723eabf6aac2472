//! Proof scripts: a goal, named lemmas and a proof tree in s-expression form.
//!
//! ```text
//! name axiom_1
//! locations i:{0,1} j:{0,1}
//! goal lookup i o update i ~ id[V(i)]
//! proof := (axiom_1 i=i)
//! ```
//!
//! Proof nodes are primitive kernel rules or derived rules; derived rules are
//! expanded into primitive subtrees during elaboration, so the kernel only
//! ever sees primitive steps.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::derived::{self, DeriveError, Variant};
use crate::kernel::{
    check_proof, Binding, Bindings, Equation, Mode, NodePath, Proof, RejectReason, Rejection,
    RuleName, SlotKind,
};
use crate::memory::{Loc, MemorySignature};
use crate::semantics::{check_semantic, EvalError, SemanticVerdict};
use crate::syntax::{EqAst, Elaborator, ParseError, Parser, Span, TermAst, Tok, TyAst};
use crate::terms::{ObjTy, Term};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Arg {
    Term(TermAst),
    Word(String, Span),
    Ty(TyAst),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum ProofAst {
    Node {
        head: String,
        span: Span,
        args: Vec<(String, Arg)>,
        premises: Vec<ProofAst>,
    },
    Ref(String, Span),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct LemmaAst {
    label: String,
    span: Span,
    eq: EqAst,
    proof: ProofAst,
}

/// What replaying a script is expected to show.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    /// The proof checks and the goal holds semantically.
    Accept,
    /// The kernel rejects the script, optionally with a given reason code.
    Reject(Option<String>),
    /// The goal is semantically false, and any proof of it is rejected.
    Counterexample,
}

/// A parsed, not yet elaborated, proof script.
#[derive(Clone, Debug)]
pub struct ProofScript {
    pub name: Option<String>,
    pub signature: Option<MemorySignature>,
    pub expect: Expectation,
    pub source: String,
    lets: Vec<(String, Span, TermAst)>,
    goal: Option<EqAst>,
    lemmas: Vec<LemmaAst>,
    proof: Option<ProofAst>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("no signature: pass --signature or add a `locations` line")]
    NoSignature,
    #[error(transparent)]
    Rejected(#[from] Rejection),
    #[error("lemma {label} states {stated} but its proof concludes {derived}")]
    LemmaMismatch {
        label: String,
        stated: String,
        derived: String,
    },
    #[error("goal is {stated} but the proof concludes {derived}")]
    GoalMismatch { stated: String, derived: String },
    #[error("{span}: unknown lemma `{label}`")]
    UnknownLemma { label: String, span: Span },
    #[error("{span}: lemma `{label}` is defined twice")]
    DuplicateLemma { label: String, span: Span },
    #[error("script has no `proof :=` item")]
    MissingProof,
    #[error("script has no `goal` item")]
    MissingGoal,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl ScriptError {
    pub fn code(&self) -> &'static str {
        match self {
            ScriptError::Parse(e) => e.kind.code(),
            ScriptError::NoSignature => "NoSignature",
            ScriptError::Rejected(r) => r.reason.code(),
            ScriptError::LemmaMismatch { .. } => "LemmaMismatch",
            ScriptError::GoalMismatch { .. } => "GoalMismatch",
            ScriptError::UnknownLemma { .. } => "UnknownLemma",
            ScriptError::DuplicateLemma { .. } => "DuplicateLemma",
            ScriptError::MissingProof => "MissingProof",
            ScriptError::MissingGoal => "MissingGoal",
            ScriptError::Eval(_) => "EvalError",
        }
    }

    /// Where in the proof tree the failure sits, when that is known.
    pub fn failing_path(&self) -> Option<String> {
        match self {
            ScriptError::Rejected(r) => Some(r.path.to_string()),
            ScriptError::LemmaMismatch { label, .. } => Some(label.clone()),
            ScriptError::UnknownLemma { label, .. } => Some(label.clone()),
            _ => None,
        }
    }

    /// Whether this is a kernel-level refusal, as opposed to a malformed file.
    pub fn is_rejection(&self) -> bool {
        matches!(
            self,
            ScriptError::Rejected(_)
                | ScriptError::LemmaMismatch { .. }
                | ScriptError::GoalMismatch { .. }
                | ScriptError::UnknownLemma { .. }
        )
    }
}

fn syntax_error(span: Span, msg: impl Into<String>) -> ParseError {
    ParseError::new(crate::syntax::ParseErrorKind::Syntax, span, msg)
}

impl ProofScript {
    pub fn parse(src: &str) -> Result<ProofScript, ParseError> {
        let mut p = Parser::new(src)?;
        let mut script = ProofScript {
            name: None,
            signature: None,
            expect: Expectation::Accept,
            source: src.to_string(),
            lets: Vec::new(),
            goal: None,
            lemmas: Vec::new(),
            proof: None,
        };
        while !p.at_eof() {
            let (word, span) = p.ident("an item keyword")?;
            let dup = |what: &str| syntax_error(span, format!("duplicate `{what}` item"));
            match word.as_str() {
                "name" => {
                    if script.name.is_some() {
                        return Err(dup("name"));
                    }
                    script.name = Some(p.ident("a script name")?.0);
                }
                "locations" => {
                    if script.signature.is_some() {
                        return Err(dup("locations"));
                    }
                    script.signature = Some(p.signature_body(span)?);
                }
                "let" => script.lets.push(p.let_body()?),
                "goal" => {
                    if script.goal.is_some() {
                        return Err(dup("goal"));
                    }
                    script.goal = Some(p.equation()?);
                }
                "lemma" => {
                    let (label, span) = p.ident("a lemma label")?;
                    p.expect(Tok::Colon)?;
                    let eq = p.equation()?;
                    p.expect(Tok::ColonEq)?;
                    let proof = proof_ast(&mut p)?;
                    script.lemmas.push(LemmaAst {
                        label,
                        span,
                        eq,
                        proof,
                    });
                }
                "proof" => {
                    if script.proof.is_some() {
                        return Err(dup("proof"));
                    }
                    p.expect(Tok::ColonEq)?;
                    script.proof = Some(proof_ast(&mut p)?);
                }
                "expect" => {
                    let (what, wspan) = p.ident("`reject` or `counterexample`")?;
                    script.expect = match what.as_str() {
                        "reject" => {
                            let next_is_code = matches!(p.peek(), Tok::Ident(s)
                                if s.chars().next().is_some_and(|c| c.is_ascii_uppercase()));
                            Expectation::Reject(next_is_code.then(|| p.ident("a reason").unwrap().0))
                        }
                        "counterexample" => Expectation::Counterexample,
                        other => {
                            return Err(syntax_error(wspan, format!("unknown expectation `{other}`")))
                        }
                    };
                }
                other => return Err(syntax_error(span, format!("unknown item `{other}`"))),
            }
        }
        Ok(script)
    }

    /// The signature to check against: `over` if given, else the script's own.
    pub fn resolve_signature(
        &self,
        over: Option<&MemorySignature>,
    ) -> Result<MemorySignature, ScriptError> {
        over.or(self.signature.as_ref())
            .cloned()
            .ok_or(ScriptError::NoSignature)
    }

    /// Lemma labels in file order.
    pub fn lemma_labels(&self) -> Vec<&str> {
        self.lemmas.iter().map(|l| l.label.as_str()).collect()
    }

    fn elaborator<'s>(&self, sig: &'s MemorySignature) -> Result<Elaborator<'s>, ScriptError> {
        let mut el = Elaborator::new(sig);
        for (name, span, t) in &self.lets {
            el.define(name, *span, t)?;
        }
        Ok(el)
    }

    /// The goal equation alone, elaborated under `sig`.
    pub fn goal(&self, sig: &MemorySignature) -> Result<Equation, ScriptError> {
        let g = self.goal.as_ref().ok_or(ScriptError::MissingGoal)?;
        Ok(self.elaborator(sig)?.equation(g)?)
    }
}

fn proof_ast(p: &mut Parser) -> Result<ProofAst, ParseError> {
    match p.peek().clone() {
        Tok::Ident(_) => {
            let (label, span) = p.ident("a lemma label")?;
            Ok(ProofAst::Ref(label, span))
        }
        Tok::LParen => {
            p.next();
            let (head, span) = p.ident("a rule name")?;
            let mut args = Vec::new();
            let mut premises = Vec::new();
            loop {
                match p.peek().clone() {
                    Tok::RParen => {
                        p.next();
                        break;
                    }
                    Tok::Ident(key) if *p.peek_at(1) == Tok::Eq => {
                        if !premises.is_empty() {
                            return Err(p.error("bindings must come before premises"));
                        }
                        p.next();
                        p.next();
                        let arg = match p.peek().clone() {
                            Tok::LBrace => {
                                p.next();
                                let t = p.term()?;
                                p.expect(Tok::RBrace)?;
                                Arg::Term(t)
                            }
                            Tok::LBracket => {
                                p.next();
                                let t = p.ty()?;
                                p.expect(Tok::RBracket)?;
                                Arg::Ty(t)
                            }
                            _ => {
                                let (w, s) = p.ident("`{term}`, `[type]` or a name")?;
                                Arg::Word(w, s)
                            }
                        };
                        args.push((key, arg));
                    }
                    _ => premises.push(proof_ast(p)?),
                }
            }
            Ok(ProofAst::Node {
                head,
                span,
                args,
                premises,
            })
        }
        other => Err(p.error(format!("expected a proof, found {other}"))),
    }
}

// ---------------------------------------------------------------- derived rule names

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Derived {
    WeakRefl,
    E03,
    E14,
    Proj {
        mode: Mode,
        perm: bool,
        second: bool,
        variant: Variant,
        rect: bool,
    },
    InvIsoLeft,
    InvIsoRight,
}

impl Derived {
    fn parse(head: &str) -> Option<Derived> {
        match head {
            "weak_refl" => return Some(Derived::WeakRefl),
            "E_0_3" => return Some(Derived::E03),
            "E_1_4" => return Some(Derived::E14),
            "inv_pi1_iso_left" => return Some(Derived::InvIsoLeft),
            "inv_pi1_iso_right" => return Some(Derived::InvIsoRight),
            _ => {}
        }
        let (mode, rest) = if let Some(r) = head.strip_prefix("weak_") {
            (Mode::Weak, r)
        } else {
            (Mode::Strong, head.strip_prefix("strong_")?)
        };
        let (perm, rest) = match rest.strip_prefix("perm_") {
            Some(r) => (true, r),
            None => (false, rest),
        };
        let rest = rest.strip_prefix("proj_")?;
        let (second, rest) = if let Some(r) = rest.strip_prefix("pi1_") {
            (false, r)
        } else {
            (true, rest.strip_prefix("pi2_")?)
        };
        let (rect, rest) = match rest.strip_suffix("_rect") {
            Some(r) => (true, r),
            None => (false, rest),
        };
        let variant = rest.parse().ok()?;
        Some(Derived::Proj {
            mode,
            perm,
            second,
            variant,
            rect,
        })
    }

    fn slots(self) -> &'static [&'static str] {
        match self {
            Derived::WeakRefl => &["f"],
            Derived::E03 => &["f", "g", "h"],
            Derived::E14 => &["h"],
            Derived::Proj {
                perm: false,
                rect: false,
                ..
            } => &["f1", "f2"],
            Derived::Proj { .. } => &["f", "g"],
            Derived::InvIsoLeft | Derived::InvIsoRight => &["x"],
        }
    }
}

/// Script name of every derived rule, for documentation and error messages.
pub fn derived_rule_names() -> Vec<String> {
    let mut out: Vec<String> = ["weak_refl", "E_0_3", "E_1_4", "inv_pi1_iso_left", "inv_pi1_iso_right"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for mode in ["weak", "strong"] {
        for perm in ["", "perm_"] {
            for pi in ["pi1", "pi2"] {
                for v in Variant::ALL {
                    for rect in ["", "_rect"] {
                        out.push(format!("{mode}_{perm}proj_{pi}_{v}{rect}"));
                    }
                }
            }
        }
    }
    out
}

fn derive_reason(e: DeriveError) -> RejectReason {
    match e {
        DeriveError::SideConditionViolated {
            slot,
            term,
            required,
            actual,
        } => RejectReason::SideConditionViolated {
            slot,
            term,
            required,
            actual,
        },
        DeriveError::Term(t) => t.into(),
        DeriveError::Kernel(r) => r.reason,
    }
}

// ---------------------------------------------------------------- elaboration

struct Elab<'a, 's> {
    sig: &'s MemorySignature,
    el: &'a Elaborator<'s>,
    lemmas: &'a HashMap<String, Proof>,
}

impl Elab<'_, '_> {
    fn reject(path: &NodePath, reason: RejectReason) -> ScriptError {
        ScriptError::Rejected(Rejection {
            path: path.clone(),
            reason,
        })
    }

    fn term_arg(&self, key: &str, arg: &Arg, path: &NodePath) -> Result<Term, ScriptError> {
        match arg {
            Arg::Term(t) => Ok(self.el.term(t)?),
            Arg::Word(w, span) => match self.el.lookup_name(w) {
                Some(t) => Ok(t.clone()),
                None => Err(ParseError::new(
                    crate::syntax::ParseErrorKind::UnknownName,
                    *span,
                    format!("unknown name `{w}`"),
                )
                .into()),
            },
            Arg::Ty(_) => Err(Self::reject(
                path,
                RejectReason::SchemaMismatch(format!("`{key}` must be a term")),
            )),
        }
    }

    fn proof(&self, ast: &ProofAst, path: &NodePath) -> Result<Proof, ScriptError> {
        let (head, args, premises) = match ast {
            ProofAst::Ref(label, span) => {
                return self.lemmas.get(label).cloned().ok_or_else(|| ScriptError::UnknownLemma {
                    label: label.clone(),
                    span: *span,
                })
            }
            ProofAst::Node {
                head,
                args,
                premises,
                ..
            } => (head, args, premises),
        };
        if let Some(d) = Derived::parse(head) {
            if !premises.is_empty() {
                return Err(Self::reject(
                    path,
                    RejectReason::SchemaMismatch(format!("derived rule {head} takes no premises")),
                ));
            }
            return self.derived(head, d, args, path);
        }
        let rule: RuleName = head.parse().map_err(|r| Self::reject(path, r))?;
        let mut bindings = Bindings::new();
        for (key, arg) in args {
            let slot = rule.slots().iter().find(|(k, _)| k == key).map(|(_, s)| *s);
            let b = match (slot, arg) {
                (Some(SlotKind::Loc), Arg::Word(w, _)) => Binding::Loc(Loc::new(w)),
                (Some(SlotKind::Loc), _) => {
                    return Err(Self::reject(
                        path,
                        RejectReason::SchemaMismatch(format!("`{key}` must be a location")),
                    ))
                }
                (Some(SlotKind::Term), a) => Binding::Term(self.term_arg(key, a, path)?),
                // let the kernel report unexpected bindings
                (None, Arg::Word(w, _)) => Binding::Loc(Loc::new(w)),
                (None, a) => Binding::Term(self.term_arg(key, a, path)?),
            };
            bindings.insert(key, b);
        }
        let mut subs = Vec::with_capacity(premises.len());
        for (n, pa) in premises.iter().enumerate() {
            let label = match pa {
                ProofAst::Ref(l, _) => Some(l.as_str()),
                _ => None,
            };
            subs.push(self.proof(pa, &path.push(n, label))?);
        }
        Proof::apply(self.sig, rule, bindings, subs).map_err(|r| Self::reject(path, r.reason))
    }

    fn derived(
        &self,
        head: &str,
        d: Derived,
        args: &[(String, Arg)],
        path: &NodePath,
    ) -> Result<Proof, ScriptError> {
        let mut terms: HashMap<&str, Term> = HashMap::new();
        let mut ty: Option<ObjTy> = None;
        for (key, arg) in args {
            if !d.slots().contains(&key.as_str()) {
                return Err(Self::reject(
                    path,
                    RejectReason::SchemaMismatch(format!("derived rule {head} has no slot `{key}`")),
                ));
            }
            if key == "x" {
                match arg {
                    Arg::Ty(t) => ty = Some(self.type_arg(t)?),
                    _ => {
                        return Err(Self::reject(
                            path,
                            RejectReason::SchemaMismatch("`x` must be a type `[...]`".to_string()),
                        ))
                    }
                }
            } else {
                terms.insert(d.slots().iter().find(|s| **s == key).unwrap(), self.term_arg(key, arg, path)?);
            }
        }
        let missing = d
            .slots()
            .iter()
            .find(|s| if **s == "x" { ty.is_none() } else { !terms.contains_key(**s) });
        if let Some(s) = missing {
            return Err(Self::reject(
                path,
                RejectReason::SchemaMismatch(format!("missing binding for `{s}`")),
            ));
        }
        let sig = self.sig;
        let t = |k: &str| &terms[k];
        let built = match d {
            Derived::WeakRefl => derived::weak_refl(sig, t("f")),
            Derived::E03 => derived::e_0_3(sig, t("f"), t("g"), t("h")),
            Derived::E14 => derived::e_1_4(sig, t("h")),
            Derived::InvIsoLeft => derived::inv_pi1_iso(sig, ty.as_ref().unwrap()).map(|p| p.0),
            Derived::InvIsoRight => derived::inv_pi1_iso(sig, ty.as_ref().unwrap()).map(|p| p.1),
            Derived::Proj {
                perm,
                second,
                variant,
                rect,
                ..
            } => {
                let pair = match (perm, rect) {
                    (false, false) => derived::pair_projections(sig, t("f1"), t("f2"), variant),
                    (false, true) => derived::prod_projections(sig, t("f"), t("g"), variant),
                    (true, false) => derived::perm_pair_projections(sig, t("f"), t("g"), variant),
                    (true, true) => derived::perm_prod_projections(sig, t("f"), t("g"), variant),
                };
                pair.map(|(a, b)| if second { b } else { a })
            }
        };
        let proof = built.map_err(|e| Self::reject(path, derive_reason(e)))?;
        match (d, proof.conclusion.mode()) {
            (Derived::Proj { mode: Mode::Weak, .. }, Mode::Strong) => {
                Proof::apply(sig, RuleName::StrongToWeak, Bindings::new(), vec![proof])
                    .map_err(|r| Self::reject(path, r.reason))
            }
            (Derived::Proj { mode: Mode::Strong, .. }, Mode::Weak) => Err(Self::reject(
                path,
                RejectReason::SchemaMismatch(format!(
                    "{head} only yields the weak equation {}",
                    proof.conclusion
                )),
            )),
            _ => Ok(proof),
        }
    }

    fn type_arg(&self, t: &TyAst) -> Result<ObjTy, ScriptError> {
        // reuse the term elaborator's checks through an identity term
        let id = self.el.term(&TermAst::Leaf(
            crate::syntax::Leaf::Id,
            vec![t.clone()],
            Span::default(),
        ))?;
        Ok(id.dom().clone())
    }
}

/// A script whose proof was accepted.
#[derive(Clone, Debug)]
pub struct CheckedScript {
    pub name: Option<String>,
    pub goal: Equation,
    pub proof: Proof,
    /// `(label, statement)` for every lemma, in file order.
    pub lemmas: Vec<(String, Equation)>,
}

/// Elaborates every lemma and the main proof, checks each against its
/// stated equation, and runs the kernel over the final tree.
pub fn check_script(script: &ProofScript, sig: &MemorySignature) -> Result<CheckedScript, ScriptError> {
    let el = script.elaborator(sig)?;
    let goal = match &script.goal {
        Some(g) => el.equation(g)?,
        None => return Err(ScriptError::MissingGoal),
    };
    let mut done: HashMap<String, Proof> = HashMap::new();
    let mut statements = Vec::new();
    for lemma in &script.lemmas {
        if done.contains_key(&lemma.label) {
            return Err(ScriptError::DuplicateLemma {
                label: lemma.label.clone(),
                span: lemma.span,
            });
        }
        let stated = el.equation(&lemma.eq)?;
        let root = NodePath {
            root_label: Some(lemma.label.clone()),
            steps: Vec::new(),
        };
        let proof = Elab {
            sig,
            el: &el,
            lemmas: &done,
        }
        .proof(&lemma.proof, &root)?
        .with_label(lemma.label.clone());
        if proof.conclusion != stated {
            return Err(ScriptError::LemmaMismatch {
                label: lemma.label.clone(),
                stated: stated.to_string(),
                derived: proof.conclusion.to_string(),
            });
        }
        statements.push((lemma.label.clone(), stated));
        done.insert(lemma.label.clone(), proof);
    }
    let body = script.proof.as_ref().ok_or(ScriptError::MissingProof)?;
    let proof = Elab {
        sig,
        el: &el,
        lemmas: &done,
    }
    .proof(body, &NodePath::default())?;
    check_proof(sig, &proof)?;
    if proof.conclusion != goal {
        return Err(ScriptError::GoalMismatch {
            stated: goal.to_string(),
            derived: proof.conclusion.to_string(),
        });
    }
    Ok(CheckedScript {
        name: script.name.clone(),
        goal,
        proof,
        lemmas: statements,
    })
}

/// Result of replaying one script against its expectation.
#[derive(Clone, Debug)]
pub struct Replay {
    pub name: Option<String>,
    pub expect: Expectation,
    pub check: Result<CheckedScript, ScriptError>,
    /// Semantic verdict on the goal, when the goal elaborates.
    pub semantic: Option<SemanticVerdict>,
    pub ok: bool,
    pub elapsed: Duration,
}

pub fn replay(script: &ProofScript, sig: &MemorySignature) -> Replay {
    let start = Instant::now();
    let check = check_script(script, sig);
    let semantic = script
        .goal(sig)
        .ok()
        .and_then(|g| check_semantic(sig, &g).ok());
    let holds = semantic.as_ref().map(SemanticVerdict::holds);
    let ok = match &script.expect {
        Expectation::Accept => check.is_ok() && holds == Some(true),
        Expectation::Reject(code) => match &check {
            Ok(_) => false,
            Err(e) => code.as_deref().is_none_or(|c| c == e.code()),
        },
        Expectation::Counterexample => {
            holds == Some(false)
                && match &check {
                    Ok(_) => false,
                    Err(e) => e.is_rejection() || matches!(e, ScriptError::MissingProof),
                }
        }
    };
    Replay {
        name: script.name.clone(),
        expect: script.expect.clone(),
        check,
        semantic,
        ok,
        elapsed: start.elapsed(),
    }
}
