//! Denotational semantics over finite stores.
//!
//! A term `f : X -> Y` denotes a map `[[X]] x S -> [[Y]] x S`. Equations are
//! decided by enumerating every input value and every store.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::kernel::{Equation, Mode};
use crate::memory::{Loc, MemorySignature, Store, Value};
use crate::terms::{Node, ObjTy, Term, TermError};

/// An element of the interpretation of an object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemValue {
    Unit,
    Base(Loc, Value),
    Pair(Arc<SemValue>, Arc<SemValue>),
}

impl SemValue {
    pub fn pair(a: SemValue, b: SemValue) -> SemValue {
        SemValue::Pair(Arc::new(a), Arc::new(b))
    }

    /// Whether this value is an element of `[[ty]]` under `sig`.
    pub fn inhabits(&self, sig: &MemorySignature, ty: &ObjTy) -> bool {
        match (self, ty) {
            (SemValue::Unit, ObjTy::Unit) => true,
            (SemValue::Base(l, v), ObjTy::Val(t)) => {
                l == t && sig.carrier(l).is_some_and(|c| c.contains(v))
            }
            (SemValue::Pair(a, b), ObjTy::Prod(x, y)) => a.inhabits(sig, x) && b.inhabits(sig, y),
            _ => false,
        }
    }
}

impl fmt::Display for SemValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemValue::Unit => f.write_str("()"),
            SemValue::Base(_, v) => write!(f, "{v}"),
            SemValue::Pair(a, b) => write!(f, "({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("value {value} does not inhabit {ty}")]
    ShapeMismatch { value: String, ty: ObjTy },
    #[error("store does not match the signature")]
    StoreMismatch,
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Evaluates `t` on input `x` in store `s`, returning the result and the
/// final store.
pub fn eval(
    sig: &MemorySignature,
    t: &Term,
    x: &SemValue,
    s: &Store,
) -> Result<(SemValue, Store), EvalError> {
    t.validate(sig)?;
    if !x.inhabits(sig, t.dom()) {
        return Err(EvalError::ShapeMismatch {
            value: x.to_string(),
            ty: t.dom().clone(),
        });
    }
    if Store::new(sig, s.values().to_vec()).is_err() {
        return Err(EvalError::StoreMismatch);
    }
    Ok(run(sig, t, x, s))
}

// Inputs are shape-correct and the term is validated against `sig`.
fn run(sig: &MemorySignature, t: &Term, x: &SemValue, s: &Store) -> (SemValue, Store) {
    match t.node() {
        Node::Id => (x.clone(), s.clone()),
        Node::Final => (SemValue::Unit, s.clone()),
        Node::Pi1 | Node::Pi2 => match x {
            SemValue::Pair(a, b) => {
                let v = if matches!(t.node(), Node::Pi1) { a } else { b };
                ((**v).clone(), s.clone())
            }
            _ => unreachable!("projection applied to a non-pair"),
        },
        Node::Lookup(l) => {
            let ix = sig.index_of(l).expect("validated location");
            (SemValue::Base(l.clone(), s.get(ix).clone()), s.clone())
        }
        Node::Update(l) => {
            let ix = sig.index_of(l).expect("validated location");
            match x {
                SemValue::Base(_, v) => (SemValue::Unit, s.with(ix, v.clone())),
                _ => unreachable!("update applied to a non-base value"),
            }
        }
        Node::Comp(g, f) => {
            let (y, s1) = run(sig, f, x, s);
            run(sig, g, &y, &s1)
        }
        // Left pair: the first component is run for its result only, on the
        // initial store; the second component's effect is kept.
        Node::Pair(f1, f2) => {
            let (r1, _) = run(sig, f1, x, s);
            let (r2, s2) = run(sig, f2, x, s);
            (SemValue::pair(r1, r2), s2)
        }
    }
}

/// All elements of `[[ty]]`, in a deterministic order.
pub fn enumerate_values(sig: &MemorySignature, ty: &ObjTy) -> Vec<SemValue> {
    match ty {
        ObjTy::Unit => vec![SemValue::Unit],
        ObjTy::Val(l) => sig
            .carrier(l)
            .unwrap_or(&[])
            .iter()
            .map(|v| SemValue::Base(l.clone(), v.clone()))
            .collect(),
        ObjTy::Prod(a, b) => {
            let right = enumerate_values(sig, b);
            enumerate_values(sig, a)
                .into_iter()
                .flat_map(|x| right.iter().map(move |y| SemValue::pair(x.clone(), y.clone())))
                .collect()
        }
    }
}

/// The full graph of `t`: one `(result, final store)` per `(input, store)`,
/// inputs outermost.
pub fn graph(sig: &MemorySignature, t: &Term) -> Result<Vec<(SemValue, Store)>, EvalError> {
    t.validate(sig)?;
    let stores: Vec<Store> = sig.stores().collect();
    Ok(enumerate_values(sig, t.dom())
        .iter()
        .flat_map(|x| stores.iter().map(move |s| run(sig, t, x, s)))
        .collect())
}

/// A witness that an equation fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub input: SemValue,
    pub store: Store,
    pub lhs_out: (SemValue, Store),
    pub rhs_out: (SemValue, Store),
}

impl Counterexample {
    pub fn show(&self, sig: &MemorySignature) -> String {
        format!(
            "input {} in store {}: lhs gives {} with {}, rhs gives {} with {}",
            self.input,
            self.store.show(sig),
            self.lhs_out.0,
            self.lhs_out.1.show(sig),
            self.rhs_out.0,
            self.rhs_out.1.show(sig),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SemanticVerdict {
    Holds,
    Counterexample(Counterexample),
}

impl SemanticVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, SemanticVerdict::Holds)
    }
}

/// Decides `eq` by exhaustive enumeration. Strong equations compare results
/// and final stores; weak ones compare results only. The first failure in
/// enumeration order (inputs outermost, then stores) is reported.
pub fn check_semantic(sig: &MemorySignature, eq: &Equation) -> Result<SemanticVerdict, EvalError> {
    let (lhs, rhs) = (eq.lhs(), eq.rhs());
    lhs.validate(sig)?;
    rhs.validate(sig)?;
    let stores: Vec<Store> = sig.stores().collect();
    for x in enumerate_values(sig, lhs.dom()) {
        for s in &stores {
            let l = run(sig, lhs, &x, s);
            let r = run(sig, rhs, &x, s);
            let agree = match eq.mode() {
                Mode::Strong => l == r,
                Mode::Weak => l.0 == r.0,
            };
            if !agree {
                return Ok(SemanticVerdict::Counterexample(Counterexample {
                    input: x,
                    store: s.clone(),
                    lhs_out: l,
                    rhs_out: r,
                }));
            }
        }
    }
    Ok(SemanticVerdict::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> MemorySignature {
        MemorySignature::from_pairs([("i", ["0", "1"]), ("j", ["0", "1"])]).unwrap()
    }

    fn store(s: &MemorySignature, vals: &[&str]) -> Store {
        Store::new(s, vals.iter().map(|v| Value::new(v)).collect()).unwrap()
    }

    fn base(l: &str, v: &str) -> SemValue {
        SemValue::Base(Loc::new(l), Value::new(v))
    }

    #[test]
    fn update_sets_one_location() {
        let s = sig();
        let upd = Term::update(&s, &Loc::new("i")).unwrap();
        let out = eval(&s, &upd, &base("i", "1"), &store(&s, &["0", "0"])).unwrap();
        assert_eq!(out, (SemValue::Unit, store(&s, &["1", "0"])));
    }

    #[test]
    fn lookup_after_update_by_hand() {
        let s = sig();
        let t = Term::comp(
            &Term::lookup(&s, &Loc::new("j")).unwrap(),
            &Term::update(&s, &Loc::new("i")).unwrap(),
        )
        .unwrap();
        let out = eval(&s, &t, &base("i", "1"), &store(&s, &["0", "1"])).unwrap();
        assert_eq!(out, (base("j", "1"), store(&s, &["1", "1"])));
    }

    #[test]
    fn identity_is_identity() {
        let s = sig();
        let ty = ObjTy::prod(ObjTy::val("i"), ObjTy::Unit);
        let id = Term::id(&s, ty).unwrap();
        let x = SemValue::pair(base("i", "0"), SemValue::Unit);
        let st = store(&s, &["1", "0"]);
        assert_eq!(eval(&s, &id, &x, &st).unwrap(), (x, st));
    }

    #[test]
    fn shape_mismatch() {
        let s = sig();
        let upd = Term::update(&s, &Loc::new("i")).unwrap();
        assert!(matches!(
            eval(&s, &upd, &base("j", "0"), &store(&s, &["0", "0"])),
            Err(EvalError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            eval(&s, &upd, &SemValue::Unit, &store(&s, &["0", "0"])),
            Err(EvalError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn value_enumeration() {
        let s = sig();
        assert_eq!(enumerate_values(&s, &ObjTy::Unit), vec![SemValue::Unit]);
        assert_eq!(enumerate_values(&s, &ObjTy::val("i")).len(), 2);
        assert_eq!(
            enumerate_values(&s, &ObjTy::prod(ObjTy::val("i"), ObjTy::Unit)).len(),
            2
        );
        assert_eq!(
            enumerate_values(&s, &ObjTy::prod(ObjTy::val("i"), ObjTy::val("j"))).len(),
            4
        );
    }

    #[test]
    fn axiom1_is_weak_not_strong() {
        let s = sig();
        let i = Loc::new("i");
        let lhs = Term::comp(&Term::lookup(&s, &i).unwrap(), &Term::update(&s, &i).unwrap()).unwrap();
        let rhs = Term::id(&s, ObjTy::val("i")).unwrap();
        let weak = Equation::weak(lhs.clone(), rhs.clone()).unwrap();
        assert!(check_semantic(&s, &weak).unwrap().holds());
        let strong = Equation::strong(lhs, rhs).unwrap();
        match check_semantic(&s, &strong).unwrap() {
            SemanticVerdict::Counterexample(c) => {
                // first (input, store) where the update changes the store:
                // input 0 with stores {i:0,j:0}, {i:0,j:1} agree, then {i:1,j:0}
                assert_eq!(c.input, base("i", "0"));
                assert_eq!(c.store, store(&s, &["1", "0"]));
                assert_eq!(c.lhs_out.1, store(&s, &["0", "0"]));
                assert_eq!(c.rhs_out.1, store(&s, &["1", "0"]));
            }
            SemanticVerdict::Holds => panic!("strong form must fail"),
        }
    }

    #[test]
    fn graph_size() {
        let s = sig();
        let upd = Term::update(&s, &Loc::new("i")).unwrap();
        assert_eq!(graph(&s, &upd).unwrap().len(), 2 * 4);
    }
}
