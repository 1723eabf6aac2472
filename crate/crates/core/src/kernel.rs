//! Strong and weak equality as explicit proof trees.
//!
//! This is the trusted part of the crate. Every rule below is one inference
//! rule of the decorated logic for global state; nothing else can produce an
//! accepted [`Proof`]. [`check_proof`] re-derives every conclusion from the
//! rule, its explicit bindings and its premises, and never trusts the
//! `conclusion` stored in a node.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::decorations::{infer_kind, Kind};
use crate::memory::{Loc, MemorySignature};
use crate::terms::{Node, ObjTy, Term, TermError};

/// Strong (`==`): same result and same final state. Weak (`~`): same result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strong,
    Weak,
}

impl Mode {
    pub fn symbol(self) -> &'static str {
        match self {
            Mode::Strong => "==",
            Mode::Weak => "~",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strong => "strong",
            Mode::Weak => "weak",
        })
    }
}

/// An equation between two parallel terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Equation {
    lhs: Term,
    rhs: Term,
    mode: Mode,
}

impl Equation {
    pub fn new(lhs: Term, rhs: Term, mode: Mode) -> Result<Self, TermError> {
        for (expected, found) in [(lhs.dom(), rhs.dom()), (lhs.cod(), rhs.cod())] {
            if expected != found {
                return Err(TermError::TypeMismatch {
                    context: "equation",
                    expected: expected.clone(),
                    found: found.clone(),
                });
            }
        }
        Ok(Equation { lhs, rhs, mode })
    }

    pub fn strong(lhs: Term, rhs: Term) -> Result<Self, TermError> {
        Self::new(lhs, rhs, Mode::Strong)
    }

    pub fn weak(lhs: Term, rhs: Term) -> Result<Self, TermError> {
        Self::new(lhs, rhs, Mode::Weak)
    }

    pub fn lhs(&self) -> &Term {
        &self.lhs
    }

    pub fn rhs(&self) -> &Term {
        &self.rhs
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The same equation with sides exchanged.
    pub fn flipped(&self) -> Equation {
        Equation {
            lhs: self.rhs.clone(),
            rhs: self.lhs.clone(),
            mode: self.mode,
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.mode.symbol(), self.rhs)
    }
}

macro_rules! rules {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// The closed set of primitive inference rules.
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum RuleName {
            $($variant),*
        }

        impl RuleName {
            pub const ALL: &'static [RuleName] = &[$(RuleName::$variant),*];

            /// The snake_case name used in proof scripts.
            pub fn script_name(self) -> &'static str {
                match self {
                    $(RuleName::$variant => $name),*
                }
            }

            pub fn camel_name(self) -> &'static str {
                match self {
                    $(RuleName::$variant => stringify!($variant)),*
                }
            }
        }

        impl FromStr for RuleName {
            type Err = RejectReason;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name | stringify!($variant) => Ok(RuleName::$variant),)*
                    other => Err(RejectReason::UnknownRule(other.to_string())),
                }
            }
        }
    };
}

rules! {
    StrongRefl => "strong_refl",
    StrongSym => "strong_sym",
    StrongTrans => "strong_trans",
    Assoc => "assoc",
    IdSrc => "id_src",
    IdTgt => "id_tgt",
    StrongSubs => "strong_subs",
    StrongRepl => "strong_repl",
    RoWeakToStrong => "ro_weak_to_strong",
    StrongToWeak => "strong_to_weak",
    WeakSym => "weak_sym",
    WeakTrans => "weak_trans",
    WeakSubs => "weak_subs",
    PureWeakRepl => "pure_weak_repl",
    WeakFinalUnique => "weak_final_unique",
    CompFinalUnique => "comp_final_unique",
    WeakProjPi1 => "weak_proj_pi1",
    StrongProjPi2 => "strong_proj_pi2",
    WeakPairUnicity => "weak_pair_unicity",
    Axiom1 => "axiom_1",
    Axiom2 => "axiom_2",
    LocalToGlobal => "local_global",
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.camel_name())
    }
}

/// What a metavariable slot of a rule expects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Term,
    Loc,
}

impl RuleName {
    /// Metavariables that must be bound explicitly. Metavariables that occur
    /// in premises are read off the premises instead.
    pub fn slots(self) -> &'static [(&'static str, SlotKind)] {
        use RuleName::*;
        use SlotKind::{Loc as L, Term as T};
        match self {
            StrongRefl | IdSrc | IdTgt | StrongSubs | WeakSubs => &[("f", T)],
            StrongRepl | PureWeakRepl => &[("g", T)],
            Assoc => &[("f", T), ("g", T), ("h", T)],
            WeakFinalUnique => &[("f", T), ("g", T)],
            WeakProjPi1 | StrongProjPi2 => &[("f1", T), ("f2", T)],
            Axiom1 => &[("i", L)],
            Axiom2 => &[("i", L), ("k", L)],
            StrongSym | StrongTrans | RoWeakToStrong | StrongToWeak | WeakSym | WeakTrans
            | CompFinalUnique | WeakPairUnicity | LocalToGlobal => &[],
        }
    }

    /// Number of premises; `None` for the per-location rule.
    pub fn arity(self) -> Option<usize> {
        use RuleName::*;
        match self {
            StrongRefl | Assoc | IdSrc | IdTgt | WeakFinalUnique | WeakProjPi1 | StrongProjPi2
            | Axiom1 | Axiom2 => Some(0),
            StrongSym | StrongSubs | StrongRepl | RoWeakToStrong | StrongToWeak | WeakSym
            | WeakSubs | PureWeakRepl => Some(1),
            StrongTrans | WeakTrans | CompFinalUnique | WeakPairUnicity => Some(2),
            LocalToGlobal => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Term(Term),
    Loc(Loc),
}

/// Explicit metavariable bindings of one rule application.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings(BTreeMap<String, Binding>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, name: &str, t: &Term) -> Self {
        self.0.insert(name.to_string(), Binding::Term(t.clone()));
        self
    }

    pub fn loc(mut self, name: &str, l: &Loc) -> Self {
        self.0.insert(name.to_string(), Binding::Loc(l.clone()));
        self
    }

    pub fn insert(&mut self, name: &str, b: Binding) {
        self.0.insert(name.to_string(), b);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Binding)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn get_term(&self, name: &str) -> Result<&Term, RejectReason> {
        match self.0.get(name) {
            Some(Binding::Term(t)) => Ok(t),
            Some(Binding::Loc(_)) => Err(RejectReason::SchemaMismatch(format!(
                "metavariable `{name}` must be bound to a term"
            ))),
            None => Err(RejectReason::SchemaMismatch(format!(
                "missing binding for `{name}`"
            ))),
        }
    }

    fn get_loc(&self, name: &str) -> Result<&Loc, RejectReason> {
        match self.0.get(name) {
            Some(Binding::Loc(l)) => Ok(l),
            Some(Binding::Term(_)) => Err(RejectReason::SchemaMismatch(format!(
                "metavariable `{name}` must be bound to a location"
            ))),
            None => Err(RejectReason::SchemaMismatch(format!(
                "missing binding for `{name}`"
            ))),
        }
    }
}

/// A rule application with its premises and the conclusion it claims.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof {
    pub rule: RuleName,
    pub bindings: Bindings,
    pub premises: Vec<Proof>,
    pub conclusion: Equation,
    /// Optional lemma name, carried through for reporting.
    pub label: Option<String>,
}

impl Proof {
    /// Applies `rule`, computing the conclusion. Fails exactly when
    /// [`check_step`] would.
    pub fn apply(
        sig: &MemorySignature,
        rule: RuleName,
        bindings: Bindings,
        premises: Vec<Proof>,
    ) -> Result<Proof, Rejection> {
        let concls: Vec<&Equation> = premises.iter().map(|p| &p.conclusion).collect();
        let conclusion = check_step(sig, rule, &bindings, &concls).map_err(|reason| Rejection {
            path: NodePath::default(),
            reason,
        })?;
        Ok(Proof {
            rule,
            bindings,
            premises,
            conclusion,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Proof {
        self.label = Some(label.into());
        self
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Proof::size).sum::<usize>()
    }

    /// Labels in pre-order, duplicates included.
    pub fn labels(&self) -> Vec<&str> {
        let mut out = Vec::new();
        fn go<'a>(p: &'a Proof, out: &mut Vec<&'a str>) {
            if let Some(l) = &p.label {
                out.push(l.as_str());
            }
            for q in &p.premises {
                go(q, out);
            }
        }
        go(self, &mut out);
        out
    }

    /// The first node (pre-order) carrying `label`.
    pub fn find_label(&self, label: &str) -> Option<&Proof> {
        if self.label.as_deref() == Some(label) {
            return Some(self);
        }
        self.premises.iter().find_map(|p| p.find_label(label))
    }

    /// Rule names used anywhere in the tree.
    pub fn rules_used(&self) -> Vec<RuleName> {
        let mut out = vec![self.rule];
        for p in &self.premises {
            out.extend(p.rules_used());
        }
        out.sort();
        out.dedup();
        out
    }
}

/// One step of a path from the root of a proof to a node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub premise: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Location of a node inside a proof tree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NodePath {
    pub root_label: Option<String>,
    pub steps: Vec<PathStep>,
}

impl NodePath {
    pub fn push(&self, premise: usize, label: Option<&str>) -> NodePath {
        let mut next = self.clone();
        next.steps.push(PathStep {
            premise,
            label: label.map(str::to_string),
        });
        next
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        if let Some(l) = &self.root_label {
            write!(f, "[{l}]")?;
        }
        for s in &self.steps {
            write!(f, "/{}", s.premise)?;
            if let Some(l) = &s.label {
                write!(f, "[{l}]")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RejectReason {
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("side condition violated: `{slot}` = {term} must be {required} but is {actual}")]
    SideConditionViolated {
        slot: String,
        term: String,
        required: Kind,
        actual: Kind,
    },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("location clash: both locations are `{0}`")]
    LocationClash(Loc),
    #[error("missing location premise: {0}")]
    MissingLocationPremise(String),
}

impl RejectReason {
    /// Stable identifier of the reason, used in JSON reports.
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::UnknownRule(_) => "UnknownRule",
            RejectReason::SchemaMismatch(_) => "SchemaMismatch",
            RejectReason::SideConditionViolated { .. } => "SideConditionViolated",
            RejectReason::TypeMismatch(_) => "TypeMismatch",
            RejectReason::LocationClash(_) => "LocationClash",
            RejectReason::MissingLocationPremise(_) => "MissingLocationPremise",
        }
    }
}

impl From<TermError> for RejectReason {
    fn from(e: TermError) -> Self {
        RejectReason::TypeMismatch(e.to_string())
    }
}

/// A rejected proof: where, and why.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("rejected at {path}: {reason}")]
pub struct Rejection {
    pub path: NodePath,
    pub reason: RejectReason,
}

pub type Verdict = Result<(), Rejection>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("invalid proof: {0}")]
    InvalidProof(Rejection),
}

/// Checks every node of `proof` against its rule schema.
pub fn check_proof(sig: &MemorySignature, proof: &Proof) -> Verdict {
    let root = NodePath {
        root_label: proof.label.clone(),
        steps: Vec::new(),
    };
    check_node(sig, proof, &root)
}

fn check_node(sig: &MemorySignature, proof: &Proof, path: &NodePath) -> Verdict {
    for (n, p) in proof.premises.iter().enumerate() {
        check_node(sig, p, &path.push(n, p.label.as_deref()))?;
    }
    let concls: Vec<&Equation> = proof.premises.iter().map(|p| &p.conclusion).collect();
    let reject = |reason| Rejection {
        path: path.clone(),
        reason,
    };
    let derived = check_step(sig, proof.rule, &proof.bindings, &concls).map_err(reject)?;
    if derived != proof.conclusion {
        return Err(reject(RejectReason::SchemaMismatch(format!(
            "stated conclusion `{}` differs from derived `{derived}`",
            proof.conclusion
        ))));
    }
    Ok(())
}

/// The conclusion of a proof that passes [`check_proof`].
pub fn conclude(sig: &MemorySignature, proof: &Proof) -> Result<Equation, KernelError> {
    check_proof(sig, proof).map_err(KernelError::InvalidProof)?;
    Ok(proof.conclusion.clone())
}

fn need_kind(slot: &str, t: &Term, required: Kind) -> Result<(), RejectReason> {
    let actual = infer_kind(t);
    if actual <= required {
        Ok(())
    } else {
        Err(RejectReason::SideConditionViolated {
            slot: slot.to_string(),
            term: t.to_string(),
            required,
            actual,
        })
    }
}

fn need_mode(n: usize, eq: &Equation, mode: Mode) -> Result<(), RejectReason> {
    if eq.mode() == mode {
        Ok(())
    } else {
        Err(RejectReason::SchemaMismatch(format!(
            "premise {n} must be a {mode} equation, found `{eq}`"
        )))
    }
}

fn need_same(what: &str, expected: &Term, found: &Term) -> Result<(), RejectReason> {
    if expected == found {
        Ok(())
    } else {
        Err(RejectReason::SchemaMismatch(format!(
            "{what}: expected `{expected}`, found `{found}`"
        )))
    }
}

fn need_unit_cod(slot: &str, t: &Term) -> Result<(), RejectReason> {
    if *t.cod() == ObjTy::Unit {
        Ok(())
    } else {
        Err(RejectReason::TypeMismatch(format!(
            "`{slot}` must have codomain unit, found {}",
            t.cod()
        )))
    }
}

/// Splits `head o rest` where `head` satisfies `is_head`.
fn split_comp(t: &Term, is_head: impl Fn(&Node) -> bool) -> Option<(&Term, &Term)> {
    match t.node() {
        Node::Comp(g, f) if is_head(g.node()) => Some((g, f)),
        _ => None,
    }
}

fn eq(lhs: Term, rhs: Term, mode: Mode) -> Result<Equation, RejectReason> {
    Ok(Equation::new(lhs, rhs, mode)?)
}

fn comp(g: &Term, f: &Term) -> Result<Term, RejectReason> {
    Ok(Term::comp(g, f)?)
}

fn check_bindings(
    sig: &MemorySignature,
    rule: RuleName,
    bindings: &Bindings,
) -> Result<(), RejectReason> {
    let slots = rule.slots();
    for (name, b) in bindings.iter() {
        let Some((_, kind)) = slots.iter().find(|(s, _)| *s == name) else {
            return Err(RejectReason::SchemaMismatch(format!(
                "rule {rule} has no metavariable `{name}`"
            )));
        };
        match (kind, b) {
            (SlotKind::Term, Binding::Term(t)) => t.validate(sig)?,
            (SlotKind::Loc, Binding::Loc(l)) => {
                if !sig.contains(l) {
                    return Err(TermError::UnknownLocation(l.clone()).into());
                }
            }
            _ => {
                return Err(RejectReason::SchemaMismatch(format!(
                    "metavariable `{name}` bound to the wrong sort"
                )))
            }
        }
    }
    Ok(())
}

/// Checks one rule application and returns its conclusion.
///
/// `premises` are the conclusions of the premise proofs, in schema order.
pub fn check_step(
    sig: &MemorySignature,
    rule: RuleName,
    bindings: &Bindings,
    premises: &[&Equation],
) -> Result<Equation, RejectReason> {
    use Mode::{Strong, Weak};
    use RuleName::*;

    if let Some(n) = rule.arity() {
        if premises.len() != n {
            return Err(RejectReason::SchemaMismatch(format!(
                "rule {rule} takes {n} premise(s), got {}",
                premises.len()
            )));
        }
    }
    check_bindings(sig, rule, bindings)?;
    let t = |name| bindings.get_term(name);

    match rule {
        StrongRefl => {
            let f = t("f")?;
            eq(f.clone(), f.clone(), Strong)
        }
        StrongSym | WeakSym => {
            let mode = if rule == StrongSym { Strong } else { Weak };
            need_mode(0, premises[0], mode)?;
            Ok(premises[0].flipped())
        }
        StrongTrans | WeakTrans => {
            let mode = if rule == StrongTrans { Strong } else { Weak };
            need_mode(0, premises[0], mode)?;
            need_mode(1, premises[1], mode)?;
            need_same("middle term", premises[0].rhs(), premises[1].lhs())?;
            eq(premises[0].lhs().clone(), premises[1].rhs().clone(), mode)
        }
        Assoc => {
            let (f, g, h) = (t("f")?, t("g")?, t("h")?);
            let lhs = comp(h, &comp(g, f)?)?;
            let rhs = comp(&comp(h, g)?, f)?;
            eq(lhs, rhs, Strong)
        }
        IdSrc => {
            let f = t("f")?;
            let id = Term::id(sig, f.dom().clone())?;
            eq(comp(f, &id)?, f.clone(), Strong)
        }
        IdTgt => {
            let f = t("f")?;
            let id = Term::id(sig, f.cod().clone())?;
            eq(comp(&id, f)?, f.clone(), Strong)
        }
        StrongSubs | WeakSubs => {
            let mode = if rule == StrongSubs { Strong } else { Weak };
            need_mode(0, premises[0], mode)?;
            let f = t("f")?;
            let (g1, g2) = (premises[0].lhs(), premises[0].rhs());
            eq(comp(g1, f)?, comp(g2, f)?, mode)
        }
        StrongRepl | PureWeakRepl => {
            let mode = if rule == StrongRepl { Strong } else { Weak };
            need_mode(0, premises[0], mode)?;
            let g = t("g")?;
            if rule == PureWeakRepl {
                need_kind("g", g, Kind::Pure)?;
            }
            let (f1, f2) = (premises[0].lhs(), premises[0].rhs());
            eq(comp(g, f1)?, comp(g, f2)?, mode)
        }
        RoWeakToStrong => {
            need_mode(0, premises[0], Weak)?;
            need_kind("lhs", premises[0].lhs(), Kind::Ro)?;
            need_kind("rhs", premises[0].rhs(), Kind::Ro)?;
            eq(premises[0].lhs().clone(), premises[0].rhs().clone(), Strong)
        }
        StrongToWeak => {
            need_mode(0, premises[0], Strong)?;
            eq(premises[0].lhs().clone(), premises[0].rhs().clone(), Weak)
        }
        WeakFinalUnique => {
            let (f, g) = (t("f")?, t("g")?);
            need_unit_cod("f", f)?;
            need_unit_cod("g", g)?;
            eq(f.clone(), g.clone(), Weak)
        }
        CompFinalUnique => {
            need_mode(0, premises[0], Strong)?;
            need_mode(1, premises[1], Weak)?;
            let (f, g) = (premises[1].lhs(), premises[1].rhs());
            let fin = Term::final_(sig, f.cod().clone())?;
            need_same("effect premise lhs", &comp(&fin, f)?, premises[0].lhs())?;
            need_same("effect premise rhs", &comp(&fin, g)?, premises[0].rhs())?;
            eq(f.clone(), g.clone(), Strong)
        }
        WeakProjPi1 | StrongProjPi2 => {
            let (f1, f2) = (t("f1")?, t("f2")?);
            need_kind("f1", f1, Kind::Ro)?;
            let pair = Term::pair(f1, f2)?;
            if rule == WeakProjPi1 {
                let pi1 = Term::pi1(sig, f1.cod().clone(), f2.cod().clone())?;
                eq(comp(&pi1, &pair)?, f1.clone(), Weak)
            } else {
                let pi2 = Term::pi2(sig, f1.cod().clone(), f2.cod().clone())?;
                eq(comp(&pi2, &pair)?, f2.clone(), Strong)
            }
        }
        WeakPairUnicity => {
            need_mode(0, premises[0], Weak)?;
            need_mode(1, premises[1], Weak)?;
            let shape = || {
                RejectReason::SchemaMismatch(
                    "premise 0 must have the form `pi1 o f ~ pi1 o g`".to_string(),
                )
            };
            let (_, f) = split_comp(premises[0].lhs(), |n| matches!(n, Node::Pi1)).ok_or_else(shape)?;
            let (_, g) = split_comp(premises[0].rhs(), |n| matches!(n, Node::Pi1)).ok_or_else(shape)?;
            let (y1, y2) = f.cod().as_prod().ok_or_else(shape)?;
            let pi1 = Term::pi1(sig, y1.clone(), y2.clone())?;
            let pi2 = Term::pi2(sig, y1.clone(), y2.clone())?;
            need_same("premise 0 lhs", &comp(&pi1, f)?, premises[0].lhs())?;
            need_same("premise 0 rhs", &comp(&pi1, g)?, premises[0].rhs())?;
            need_same("premise 1 lhs", &comp(&pi2, f)?, premises[1].lhs())?;
            need_same("premise 1 rhs", &comp(&pi2, g)?, premises[1].rhs())?;
            eq(f.clone(), g.clone(), Weak)
        }
        Axiom1 => {
            let i = bindings.get_loc("i")?;
            let lhs = comp(&Term::lookup(sig, i)?, &Term::update(sig, i)?)?;
            eq(lhs, Term::id(sig, ObjTy::Val(i.clone()))?, Weak)
        }
        Axiom2 => {
            let (i, k) = (bindings.get_loc("i")?, bindings.get_loc("k")?);
            if i == k {
                return Err(RejectReason::LocationClash(i.clone()));
            }
            let look = Term::lookup(sig, i)?;
            let lhs = comp(&look, &Term::update(sig, k)?)?;
            let rhs = comp(&look, &Term::final_(sig, ObjTy::Val(k.clone()))?)?;
            eq(lhs, rhs, Weak)
        }
        LocalToGlobal => local_to_global(sig, premises),
    }
}

fn local_to_global(sig: &MemorySignature, premises: &[&Equation]) -> Result<Equation, RejectReason> {
    let locs = sig.locations();
    if locs.is_empty() {
        return Err(RejectReason::SchemaMismatch(
            "local_global needs at least one declared location".to_string(),
        ));
    }
    if premises.len() != locs.len() {
        return Err(RejectReason::MissingLocationPremise(format!(
            "expected one premise per location ({}), got {}",
            locs.len(),
            premises.len()
        )));
    }
    let observed = |n: usize, side: &Term| -> Result<Term, RejectReason> {
        match split_comp(side, |h| matches!(h, Node::Lookup(_))) {
            Some((look, f)) if matches!(look.node(), Node::Lookup(l) if *l == locs[n]) => {
                Ok(f.clone())
            }
            _ => Err(RejectReason::MissingLocationPremise(format!(
                "premise {n} must observe location `{}` on both sides",
                locs[n]
            ))),
        }
    };
    let f = observed(0, premises[0].lhs())?;
    let g = observed(0, premises[0].rhs())?;
    need_unit_cod("f", &f)?;
    for (n, p) in premises.iter().enumerate() {
        need_mode(n, p, Mode::Weak)?;
        need_same("observed lhs", &f, &observed(n, p.lhs())?)?;
        need_same("observed rhs", &g, &observed(n, p.rhs())?)?;
    }
    eq(f, g, Mode::Strong)
}
