//! Typed closed terms of the decorated language.
//!
//! Terms are oriented `dom -> cod`. A Coq-style `term X Y` denotes a map
//! `Y -> X`; here the same map has `dom = Y` and `cod = X`.
//!
//! Every constructor checks its typing rule, so a [`Term`] value is always
//! well typed. `Pair` is the left (semi-pure) pair; the right pair is built
//! in [`crate::derived`].

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::memory::{Loc, MemorySignature};

/// Objects of the category: unit, the value type of a location, and binary
/// products.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjTy {
    Unit,
    Val(Loc),
    Prod(Arc<ObjTy>, Arc<ObjTy>),
}

impl ObjTy {
    pub fn val(loc: impl Into<Loc>) -> Self {
        ObjTy::Val(loc.into())
    }

    pub fn prod(left: ObjTy, right: ObjTy) -> Self {
        ObjTy::Prod(Arc::new(left), Arc::new(right))
    }

    /// Every location mentioned in this type is declared in `sig`.
    pub fn check(&self, sig: &MemorySignature) -> Result<(), TermError> {
        match self {
            ObjTy::Unit => Ok(()),
            ObjTy::Val(l) if sig.contains(l) => Ok(()),
            ObjTy::Val(l) => Err(TermError::UnknownLocation(l.clone())),
            ObjTy::Prod(a, b) => {
                a.check(sig)?;
                b.check(sig)
            }
        }
    }

    pub fn as_prod(&self) -> Option<(&ObjTy, &ObjTy)> {
        match self {
            ObjTy::Prod(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

impl fmt::Display for ObjTy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjTy::Unit => f.write_str("unit"),
            ObjTy::Val(l) => write!(f, "V({l})"),
            ObjTy::Prod(a, b) => {
                let side = |t: &ObjTy, f: &mut fmt::Formatter<'_>| match t {
                    ObjTy::Prod(..) => write!(f, "({t})"),
                    _ => write!(f, "{t}"),
                };
                side(a, f)?;
                f.write_str("*")?;
                side(b, f)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("type mismatch in {context}: expected {expected}, found {found}")]
    TypeMismatch {
        context: &'static str,
        expected: ObjTy,
        found: ObjTy,
    },
    #[error("unknown location `{0}`")]
    UnknownLocation(Loc),
}

/// Term constructors. Child terms of `Comp` are stored as `(g, f)` for `g o f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Id,
    Comp(Term, Term),
    Final,
    Pair(Term, Term),
    Pi1,
    Pi2,
    Lookup(Loc),
    Update(Loc),
}

#[derive(Debug, PartialEq, Eq, Hash)]
struct TermData {
    node: Node,
    dom: ObjTy,
    cod: ObjTy,
}

/// A well-typed term with explicit source and target objects.
#[derive(Clone, Debug, Eq)]
pub struct Term(Arc<TermData>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl Term {
    fn mk(node: Node, dom: ObjTy, cod: ObjTy) -> Term {
        Term(Arc::new(TermData { node, dom, cod }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn dom(&self) -> &ObjTy {
        &self.0.dom
    }

    pub fn cod(&self) -> &ObjTy {
        &self.0.cod
    }

    /// `id_X : X -> X`
    pub fn id(sig: &MemorySignature, x: ObjTy) -> Result<Term, TermError> {
        x.check(sig)?;
        Ok(Term::mk(Node::Id, x.clone(), x))
    }

    /// `g o f : dom(f) -> cod(g)`, requiring `cod(f) = dom(g)`.
    pub fn comp(g: &Term, f: &Term) -> Result<Term, TermError> {
        if f.cod() != g.dom() {
            return Err(TermError::TypeMismatch {
                context: "composition",
                expected: g.dom().clone(),
                found: f.cod().clone(),
            });
        }
        Ok(Term::mk(
            Node::Comp(g.clone(), f.clone()),
            f.dom().clone(),
            g.cod().clone(),
        ))
    }

    /// `final_X : X -> unit`
    pub fn final_(sig: &MemorySignature, x: ObjTy) -> Result<Term, TermError> {
        x.check(sig)?;
        Ok(Term::mk(Node::Final, x, ObjTy::Unit))
    }

    /// Left pair `<f, g> : X -> Y1*Y2` of `f : X -> Y1` and `g : X -> Y2`.
    pub fn pair(f: &Term, g: &Term) -> Result<Term, TermError> {
        if f.dom() != g.dom() {
            return Err(TermError::TypeMismatch {
                context: "pair",
                expected: f.dom().clone(),
                found: g.dom().clone(),
            });
        }
        Ok(Term::mk(
            Node::Pair(f.clone(), g.clone()),
            f.dom().clone(),
            ObjTy::prod(f.cod().clone(), g.cod().clone()),
        ))
    }

    /// `pi1 : X*Y -> X`
    pub fn pi1(sig: &MemorySignature, x: ObjTy, y: ObjTy) -> Result<Term, TermError> {
        x.check(sig)?;
        y.check(sig)?;
        Ok(Term::mk(Node::Pi1, ObjTy::prod(x.clone(), y), x))
    }

    /// `pi2 : X*Y -> Y`
    pub fn pi2(sig: &MemorySignature, x: ObjTy, y: ObjTy) -> Result<Term, TermError> {
        x.check(sig)?;
        y.check(sig)?;
        Ok(Term::mk(Node::Pi2, ObjTy::prod(x, y.clone()), y))
    }

    /// `lookup_i : unit -> V(i)`
    pub fn lookup(sig: &MemorySignature, loc: &Loc) -> Result<Term, TermError> {
        if !sig.contains(loc) {
            return Err(TermError::UnknownLocation(loc.clone()));
        }
        Ok(Term::mk(
            Node::Lookup(loc.clone()),
            ObjTy::Unit,
            ObjTy::Val(loc.clone()),
        ))
    }

    /// `update_i : V(i) -> unit`
    pub fn update(sig: &MemorySignature, loc: &Loc) -> Result<Term, TermError> {
        if !sig.contains(loc) {
            return Err(TermError::UnknownLocation(loc.clone()));
        }
        Ok(Term::mk(
            Node::Update(loc.clone()),
            ObjTy::Val(loc.clone()),
            ObjTy::Unit,
        ))
    }

    /// Recomputes every node's boundary from its children and compares it
    /// with the stored one, and checks all locations against `sig`.
    pub fn validate(&self, sig: &MemorySignature) -> Result<(), TermError> {
        self.dom().check(sig)?;
        self.cod().check(sig)?;
        let expect = |context, expected: &ObjTy, found: &ObjTy| {
            if expected == found {
                Ok(())
            } else {
                Err(TermError::TypeMismatch {
                    context,
                    expected: expected.clone(),
                    found: found.clone(),
                })
            }
        };
        match self.node() {
            Node::Id => expect("id", self.dom(), self.cod()),
            Node::Final => expect("final", &ObjTy::Unit, self.cod()),
            Node::Pi1 | Node::Pi2 => {
                let (a, b) = self.dom().as_prod().ok_or_else(|| TermError::TypeMismatch {
                    context: "projection",
                    expected: ObjTy::prod(self.cod().clone(), self.cod().clone()),
                    found: self.dom().clone(),
                })?;
                let want = if matches!(self.node(), Node::Pi1) { a } else { b };
                expect("projection", want, self.cod())
            }
            Node::Lookup(l) => {
                expect("lookup", &ObjTy::Unit, self.dom())?;
                expect("lookup", &ObjTy::Val(l.clone()), self.cod())
            }
            Node::Update(l) => {
                expect("update", &ObjTy::Val(l.clone()), self.dom())?;
                expect("update", &ObjTy::Unit, self.cod())
            }
            Node::Comp(g, f) => {
                g.validate(sig)?;
                f.validate(sig)?;
                expect("composition", g.dom(), f.cod())?;
                expect("composition", f.dom(), self.dom())?;
                expect("composition", g.cod(), self.cod())
            }
            Node::Pair(f, g) => {
                f.validate(sig)?;
                g.validate(sig)?;
                expect("pair", f.dom(), g.dom())?;
                expect("pair", f.dom(), self.dom())?;
                expect(
                    "pair",
                    &ObjTy::prod(f.cod().clone(), g.cod().clone()),
                    self.cod(),
                )
            }
        }
    }

    /// Height of the term tree; leaves have depth 1.
    pub fn depth(&self) -> usize {
        match self.node() {
            Node::Comp(a, b) | Node::Pair(a, b) => 1 + a.depth().max(b.depth()),
            _ => 1,
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Comp(a, b) | Node::Pair(a, b) => 1 + a.size() + b.size(),
            _ => 1,
        }
    }

    /// Sorted, deduplicated locations mentioned anywhere in the term.
    pub fn locations(&self) -> Vec<Loc> {
        fn ty(t: &ObjTy, out: &mut Vec<Loc>) {
            match t {
                ObjTy::Unit => {}
                ObjTy::Val(l) => out.push(l.clone()),
                ObjTy::Prod(a, b) => {
                    ty(a, out);
                    ty(b, out);
                }
            }
        }
        fn go(t: &Term, out: &mut Vec<Loc>) {
            ty(t.dom(), out);
            ty(t.cod(), out);
            match t.node() {
                Node::Comp(a, b) | Node::Pair(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Node::Lookup(l) | Node::Update(l) => out.push(l.clone()),
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

/// Prints in the surface syntax with every type annotation explicit, so the
/// output parses back to the same term.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Id => write!(f, "id[{}]", self.dom()),
            Node::Final => write!(f, "final[{}]", self.dom()),
            Node::Pi1 | Node::Pi2 => {
                let (a, b) = self.dom().as_prod().expect("projection domain is a product");
                let name = if matches!(self.node(), Node::Pi1) { "pi1" } else { "pi2" };
                write!(f, "{name}[{a},{b}]")
            }
            Node::Lookup(l) => write!(f, "lookup {l}"),
            Node::Update(l) => write!(f, "update {l}"),
            Node::Pair(a, b) => write!(f, "pair({a}, {b})"),
            // `o` associates to the right
            Node::Comp(g, h) => {
                if matches!(g.node(), Node::Comp(..)) {
                    write!(f, "({g}) o {h}")
                } else {
                    write!(f, "{g} o {h}")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> MemorySignature {
        MemorySignature::from_pairs([("i", ["0", "1"]), ("j", ["0", "1"])]).unwrap()
    }

    fn vi() -> ObjTy {
        ObjTy::val("i")
    }

    #[test]
    fn identities() {
        let s = sig();
        for x in [vi(), ObjTy::Unit, ObjTy::prod(vi(), ObjTy::Unit)] {
            let t = Term::id(&s, x.clone()).unwrap();
            assert_eq!((t.dom(), t.cod()), (&x, &x));
        }
    }

    #[test]
    fn lookup_after_update() {
        let s = sig();
        let g = Term::lookup(&s, &Loc::new("j")).unwrap();
        let f = Term::update(&s, &Loc::new("i")).unwrap();
        let t = Term::comp(&g, &f).unwrap();
        assert_eq!(t.dom(), &vi());
        assert_eq!(t.cod(), &ObjTy::val("j"));
        assert_eq!(t.to_string(), "lookup j o update i");
    }

    #[test]
    fn pi1_after_final_is_ill_typed() {
        let s = sig();
        let fin = Term::final_(&s, vi()).unwrap();
        let p = Term::pi1(&s, vi(), ObjTy::Unit).unwrap();
        assert!(matches!(
            Term::comp(&p, &fin),
            Err(TermError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn id_after_id() {
        let s = sig();
        let id = Term::id(&s, vi()).unwrap();
        let t = Term::comp(&id, &id).unwrap();
        assert_eq!((t.dom(), t.cod()), (&vi(), &vi()));
    }

    #[test]
    fn pair_with_identity() {
        let s = sig();
        let t = Term::pair(&Term::id(&s, vi()).unwrap(), &Term::final_(&s, vi()).unwrap()).unwrap();
        assert_eq!(t.dom(), &vi());
        assert_eq!(t.cod(), &ObjTy::prod(vi(), ObjTy::Unit));
    }

    #[test]
    fn pair_domains_must_agree() {
        let s = sig();
        let f = Term::id(&s, vi()).unwrap();
        let g = Term::id(&s, ObjTy::Unit).unwrap();
        assert!(matches!(
            Term::pair(&f, &g),
            Err(TermError::TypeMismatch { context: "pair", .. })
        ));
    }

    #[test]
    fn unknown_locations_rejected_eagerly() {
        let s = sig();
        let k = Loc::new("k");
        assert_eq!(Term::update(&s, &k), Err(TermError::UnknownLocation(k.clone())));
        assert_eq!(Term::lookup(&s, &k), Err(TermError::UnknownLocation(k.clone())));
        assert_eq!(
            Term::id(&s, ObjTy::prod(vi(), ObjTy::Val(k.clone()))),
            Err(TermError::UnknownLocation(k))
        );
    }

    #[test]
    fn validate_agrees_with_constructors() {
        let s = sig();
        let p = Term::pair(
            &Term::pi2(&s, vi(), ObjTy::Unit).unwrap(),
            &Term::pi1(&s, vi(), ObjTy::Unit).unwrap(),
        )
        .unwrap();
        let t = Term::comp(&Term::update(&s, &Loc::new("i")).unwrap(), &Term::comp(
            &Term::pi2(&s, ObjTy::Unit, vi()).unwrap(),
            &p,
        ).unwrap())
        .unwrap();
        t.validate(&s).unwrap();
        let other = MemorySignature::from_pairs([("j", ["0"])]).unwrap();
        assert!(t.validate(&other).is_err());
    }

    #[test]
    fn printing_brackets_left_nested_composition() {
        let s = sig();
        let a = Term::id(&s, vi()).unwrap();
        let left = Term::comp(&Term::comp(&a, &a).unwrap(), &a).unwrap();
        let right = Term::comp(&a, &Term::comp(&a, &a).unwrap()).unwrap();
        assert_eq!(left.to_string(), "(id[V(i)] o id[V(i)]) o id[V(i)]");
        assert_eq!(right.to_string(), "id[V(i)] o id[V(i)] o id[V(i)]");
        assert_eq!(
            ObjTy::prod(ObjTy::prod(vi(), ObjTy::Unit), vi()).to_string(),
            "(V(i)*unit)*V(i)"
        );
    }
}
