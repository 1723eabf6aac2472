//! Derived terms and derived rules.
//!
//! Nothing here is trusted: every derived rule builds an ordinary kernel
//! [`Proof`] out of primitive rule applications, and the result goes through
//! [`crate::kernel::check_proof`] like any other proof.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::decorations::{infer_kind, Kind};
use crate::kernel::{Bindings, Mode, Proof, Rejection, RuleName};
use crate::memory::MemorySignature;
use crate::terms::{ObjTy, Term, TermError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("side condition violated: `{slot}` = {term} must be {required} but is {actual}")]
    SideConditionViolated {
        slot: String,
        term: String,
        required: Kind,
        actual: Kind,
    },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Kernel(#[from] Rejection),
}

/// `inv_pi1 = <id_X, final_X> : X -> X*unit`
pub fn inv_pi1(sig: &MemorySignature, x: &ObjTy) -> Result<Term, TermError> {
    Term::pair(&Term::id(sig, x.clone())?, &Term::final_(sig, x.clone())?)
}

/// `permut = <pi2, pi1> : X*Y -> Y*X`
pub fn permut(sig: &MemorySignature, x: &ObjTy, y: &ObjTy) -> Result<Term, TermError> {
    Term::pair(
        &Term::pi2(sig, x.clone(), y.clone())?,
        &Term::pi1(sig, x.clone(), y.clone())?,
    )
}

/// Right pair of `f : X -> Y` and `g : X -> Z`: `permut o <g, f> : X -> Y*Z`.
pub fn perm_pair(sig: &MemorySignature, f: &Term, g: &Term) -> Result<Term, TermError> {
    let inner = Term::pair(g, f)?;
    Term::comp(&permut(sig, g.cod(), f.cod())?, &inner)
}

/// Left semi-pure product `<f o pi1, g o pi2> : X1*X2 -> Y1*Y2`.
pub fn prod(sig: &MemorySignature, f: &Term, g: &Term) -> Result<Term, TermError> {
    let (x1, x2) = (f.dom().clone(), g.dom().clone());
    Term::pair(
        &Term::comp(f, &Term::pi1(sig, x1.clone(), x2.clone())?)?,
        &Term::comp(g, &Term::pi2(sig, x1, x2)?)?,
    )
}

/// Right semi-pure product `perm_pair(f o pi1, g o pi2)`.
pub fn perm_prod(sig: &MemorySignature, f: &Term, g: &Term) -> Result<Term, TermError> {
    let (x1, x2) = (f.dom().clone(), g.dom().clone());
    perm_pair(
        sig,
        &Term::comp(f, &Term::pi1(sig, x1.clone(), x2.clone())?)?,
        &Term::comp(g, &Term::pi2(sig, x1, x2)?)?,
    )
}

/// Left sequential product: `f1` runs first.
/// `prod(id, f2) o perm_prod(f1, id)`.
pub fn left_seq_prod(sig: &MemorySignature, f1: &Term, f2: &Term) -> Result<Term, TermError> {
    let first = perm_prod(sig, f1, &Term::id(sig, f2.dom().clone())?)?;
    let second = prod(sig, &Term::id(sig, f1.cod().clone())?, f2)?;
    Term::comp(&second, &first)
}

/// Right sequential product: `f2` runs first.
/// `perm_prod(f1, id) o prod(id, f2)`.
pub fn right_seq_prod(sig: &MemorySignature, f1: &Term, f2: &Term) -> Result<Term, TermError> {
    let first = prod(sig, &Term::id(sig, f1.dom().clone())?, f2)?;
    let second = perm_prod(sig, f1, &Term::id(sig, f2.cod().clone())?)?;
    Term::comp(&second, &first)
}

/// Decoration pattern of the two components of a pair or product, named
/// first-component kind then second-component kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    PurePure,
    PureRo,
    PureRw,
    RoPure,
    RwPure,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::PurePure,
        Variant::PureRo,
        Variant::PureRw,
        Variant::RoPure,
        Variant::RwPure,
    ];

    pub fn kinds(self) -> (Kind, Kind) {
        match self {
            Variant::PurePure => (Kind::Pure, Kind::Pure),
            Variant::PureRo => (Kind::Pure, Kind::Ro),
            Variant::PureRw => (Kind::Pure, Kind::Rw),
            Variant::RoPure => (Kind::Ro, Kind::Pure),
            Variant::RwPure => (Kind::Rw, Kind::Pure),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::PurePure => "purepure",
            Variant::PureRo => "purero",
            Variant::PureRw => "purerw",
            Variant::RoPure => "ropure",
            Variant::RwPure => "rwpure",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

fn need_kind(slot: &str, t: &Term, required: Kind) -> Result<(), DeriveError> {
    let actual = infer_kind(t);
    if actual <= required {
        Ok(())
    } else {
        Err(DeriveError::SideConditionViolated {
            slot: slot.to_string(),
            term: t.to_string(),
            required,
            actual,
        })
    }
}

/// Thin wrapper around [`Proof::apply`] for chaining primitive steps.
pub struct Steps<'a> {
    sig: &'a MemorySignature,
}

impl<'a> Steps<'a> {
    pub fn new(sig: &'a MemorySignature) -> Self {
        Steps { sig }
    }

    fn app(&self, rule: RuleName, b: Bindings, premises: Vec<Proof>) -> Result<Proof, DeriveError> {
        Ok(Proof::apply(self.sig, rule, b, premises)?)
    }

    pub fn refl(&self, f: &Term) -> Result<Proof, DeriveError> {
        self.app(RuleName::StrongRefl, Bindings::new().term("f", f), vec![])
    }

    pub fn sym(&self, p: Proof) -> Result<Proof, DeriveError> {
        let rule = match p.conclusion.mode() {
            Mode::Strong => RuleName::StrongSym,
            Mode::Weak => RuleName::WeakSym,
        };
        self.app(rule, Bindings::new(), vec![p])
    }

    pub fn weaken(&self, p: Proof) -> Result<Proof, DeriveError> {
        match p.conclusion.mode() {
            Mode::Weak => Ok(p),
            Mode::Strong => self.app(RuleName::StrongToWeak, Bindings::new(), vec![p]),
        }
    }

    /// Transitivity; a strong premise is weakened when the other is weak.
    pub fn trans(&self, p: Proof, q: Proof) -> Result<Proof, DeriveError> {
        match (p.conclusion.mode(), q.conclusion.mode()) {
            (Mode::Strong, Mode::Strong) => self.app(RuleName::StrongTrans, Bindings::new(), vec![p, q]),
            _ => {
                let (p, q) = (self.weaken(p)?, self.weaken(q)?);
                self.app(RuleName::WeakTrans, Bindings::new(), vec![p, q])
            }
        }
    }

    /// Folds `trans` over a non-empty list of proofs.
    pub fn chain(&self, proofs: Vec<Proof>) -> Result<Proof, DeriveError> {
        let mut it = proofs.into_iter();
        let first = it.next().expect("chain of at least one proof");
        it.try_fold(first, |acc, p| self.trans(acc, p))
    }

    /// `h o (g o f) == (h o g) o f`
    pub fn assoc(&self, f: &Term, g: &Term, h: &Term) -> Result<Proof, DeriveError> {
        self.app(
            RuleName::Assoc,
            Bindings::new().term("f", f).term("g", g).term("h", h),
            vec![],
        )
    }

    pub fn id_src(&self, f: &Term) -> Result<Proof, DeriveError> {
        self.app(RuleName::IdSrc, Bindings::new().term("f", f), vec![])
    }

    pub fn id_tgt(&self, f: &Term) -> Result<Proof, DeriveError> {
        self.app(RuleName::IdTgt, Bindings::new().term("f", f), vec![])
    }

    /// From `g1 = g2` infer `g1 o f = g2 o f`, keeping the premise's mode.
    pub fn subs(&self, p: Proof, f: &Term) -> Result<Proof, DeriveError> {
        let rule = match p.conclusion.mode() {
            Mode::Strong => RuleName::StrongSubs,
            Mode::Weak => RuleName::WeakSubs,
        };
        self.app(rule, Bindings::new().term("f", f), vec![p])
    }

    /// From `f1 = f2` infer `g o f1 = g o f2`. Weak premises need a pure `g`.
    pub fn repl(&self, g: &Term, p: Proof) -> Result<Proof, DeriveError> {
        let rule = match p.conclusion.mode() {
            Mode::Strong => RuleName::StrongRepl,
            Mode::Weak => RuleName::PureWeakRepl,
        };
        self.app(rule, Bindings::new().term("g", g), vec![p])
    }

    /// Weak to strong between accessors.
    pub fn upgrade(&self, p: Proof) -> Result<Proof, DeriveError> {
        match p.conclusion.mode() {
            Mode::Strong => Ok(p),
            Mode::Weak => self.app(RuleName::RoWeakToStrong, Bindings::new(), vec![p]),
        }
    }

    pub fn weak_final_unique(&self, f: &Term, g: &Term) -> Result<Proof, DeriveError> {
        self.app(
            RuleName::WeakFinalUnique,
            Bindings::new().term("f", f).term("g", g),
            vec![],
        )
    }

    pub fn weak_proj_pi1(&self, f1: &Term, f2: &Term) -> Result<Proof, DeriveError> {
        self.app(
            RuleName::WeakProjPi1,
            Bindings::new().term("f1", f1).term("f2", f2),
            vec![],
        )
    }

    pub fn strong_proj_pi2(&self, f1: &Term, f2: &Term) -> Result<Proof, DeriveError> {
        self.app(
            RuleName::StrongProjPi2,
            Bindings::new().term("f1", f1).term("f2", f2),
            vec![],
        )
    }

    pub fn comp_final_unique(&self, effect: Proof, result: Proof) -> Result<Proof, DeriveError> {
        self.app(RuleName::CompFinalUnique, Bindings::new(), vec![effect, result])
    }
}

/// `f ~ f`, from strong reflexivity.
pub fn weak_refl(sig: &MemorySignature, f: &Term) -> Result<Proof, DeriveError> {
    let s = Steps::new(sig);
    s.weaken(s.refl(f)?)
}

/// `f o g == h` for pure `f`, `g`, `h` where `f o g` and `h` map into unit.
pub fn e_0_3(sig: &MemorySignature, f: &Term, g: &Term, h: &Term) -> Result<Proof, DeriveError> {
    need_kind("f", f, Kind::Pure)?;
    need_kind("g", g, Kind::Pure)?;
    need_kind("h", h, Kind::Pure)?;
    let fg = Term::comp(f, g)?;
    let s = Steps::new(sig);
    s.upgrade(s.weak_final_unique(&fg, h)?)
}

/// `final o h == id_unit` for an accessor `h : unit -> X`.
pub fn e_1_4(sig: &MemorySignature, h: &Term) -> Result<Proof, DeriveError> {
    if *h.dom() != ObjTy::Unit {
        return Err(TermError::TypeMismatch {
            context: "E_1_4 domain",
            expected: ObjTy::Unit,
            found: h.dom().clone(),
        }
        .into());
    }
    need_kind("h", h, Kind::Ro)?;
    let fh = Term::comp(&Term::final_(sig, h.cod().clone())?, h)?;
    let s = Steps::new(sig);
    s.upgrade(s.weak_final_unique(&fh, &Term::id(sig, ObjTy::Unit)?)?)
}

fn check_variant(
    variant: Variant,
    first: (&str, &Term),
    second: (&str, &Term),
) -> Result<(), DeriveError> {
    let (k1, k2) = variant.kinds();
    need_kind(first.0, first.1, k1)?;
    need_kind(second.0, second.1, k2)
}

/// Projections of the left pair `<f1, f2>`:
/// `pi1 o <f1,f2> ~ f1` (strong when the second component is an accessor)
/// and `pi2 o <f1,f2> == f2`.
pub fn pair_projections(
    sig: &MemorySignature,
    f1: &Term,
    f2: &Term,
    variant: Variant,
) -> Result<(Proof, Proof), DeriveError> {
    check_variant(variant, ("f1", f1), ("f2", f2))?;
    need_kind("f1", f1, Kind::Ro)?;
    let s = Steps::new(sig);
    let mut p1 = s.weak_proj_pi1(f1, f2)?;
    if variant.kinds().1 <= Kind::Ro {
        p1 = s.upgrade(p1)?;
    }
    let p2 = s.strong_proj_pi2(f1, f2)?;
    Ok((p1, p2))
}

/// Projections of `prod(f, g)`: `pi1 o prod(f,g) ~ f o pi1` and
/// `pi2 o prod(f,g) == g o pi2`.
pub fn prod_projections(
    sig: &MemorySignature,
    f: &Term,
    g: &Term,
    variant: Variant,
) -> Result<(Proof, Proof), DeriveError> {
    check_variant(variant, ("f", f), ("g", g))?;
    need_kind("f", f, Kind::Ro)?;
    let (x1, x2) = (f.dom().clone(), g.dom().clone());
    let a = Term::comp(f, &Term::pi1(sig, x1.clone(), x2.clone())?)?;
    let b = Term::comp(g, &Term::pi2(sig, x1, x2)?)?;
    pair_projections(sig, &a, &b, variant)
}

/// Projections of the right pair `perm_pair(f, g)`:
/// `pi1 o perm_pair(f,g) == f` and `pi2 o perm_pair(f,g) ~ g` (strong when
/// `f` is an accessor).
pub fn perm_pair_projections(
    sig: &MemorySignature,
    f: &Term,
    g: &Term,
    variant: Variant,
) -> Result<(Proof, Proof), DeriveError> {
    check_variant(variant, ("f", f), ("g", g))?;
    need_kind("g", g, Kind::Ro)?;
    let s = Steps::new(sig);
    let inner = Term::pair(g, f)?;
    let swap = permut(sig, g.cod(), f.cod())?;
    let (swap_pi1, swap_pi2) = pair_projections(
        sig,
        &Term::pi2(sig, g.cod().clone(), f.cod().clone())?,
        &Term::pi1(sig, g.cod().clone(), f.cod().clone())?,
        Variant::PurePure,
    )?;
    let out_pi1 = Term::pi1(sig, f.cod().clone(), g.cod().clone())?;
    let out_pi2 = Term::pi2(sig, f.cod().clone(), g.cod().clone())?;

    // pi1 o (permut o <g,f>) == (pi1 o permut) o <g,f> == pi2 o <g,f> == f
    let first = s.chain(vec![
        s.assoc(&inner, &swap, &out_pi1)?,
        s.subs(swap_pi1, &inner)?,
        s.strong_proj_pi2(g, f)?,
    ])?;

    // pi2 o (permut o <g,f>) == (pi2 o permut) o <g,f> == pi1 o <g,f> ~ g
    let mut last = s.weak_proj_pi1(g, f)?;
    if variant.kinds().0 <= Kind::Ro {
        last = s.upgrade(last)?;
    }
    let second = s.chain(vec![
        s.assoc(&inner, &swap, &out_pi2)?,
        s.subs(swap_pi2, &inner)?,
        last,
    ])?;
    Ok((first, second))
}

/// Projections of `perm_prod(f, g)`: `pi1 o perm_prod(f,g) == f o pi1` and
/// `pi2 o perm_prod(f,g) ~ g o pi2`.
pub fn perm_prod_projections(
    sig: &MemorySignature,
    f: &Term,
    g: &Term,
    variant: Variant,
) -> Result<(Proof, Proof), DeriveError> {
    check_variant(variant, ("f", f), ("g", g))?;
    need_kind("g", g, Kind::Ro)?;
    let (x1, x2) = (f.dom().clone(), g.dom().clone());
    let a = Term::comp(f, &Term::pi1(sig, x1.clone(), x2.clone())?)?;
    let b = Term::comp(g, &Term::pi2(sig, x1, x2)?)?;
    perm_pair_projections(sig, &a, &b, variant)
}

/// `pi1 o inv_pi1 == id_X` and `inv_pi1 o pi1 == id_{X*unit}`.
pub fn inv_pi1_iso(sig: &MemorySignature, x: &ObjTy) -> Result<(Proof, Proof), DeriveError> {
    let s = Steps::new(sig);
    let id_x = Term::id(sig, x.clone())?;
    let fin_x = Term::final_(sig, x.clone())?;
    let inv = inv_pi1(sig, x)?;
    let xu = ObjTy::prod(x.clone(), ObjTy::Unit);
    let pi1 = Term::pi1(sig, x.clone(), ObjTy::Unit)?;
    let pi2 = Term::pi2(sig, x.clone(), ObjTy::Unit)?;
    let id_xu = Term::id(sig, xu)?;

    let (left, pi2_inv) = pair_projections(sig, &id_x, &fin_x, Variant::PurePure)?;

    // pi1 o (inv o pi1) == (pi1 o inv) o pi1 == id o pi1 == pi1 == pi1 o id
    let on_pi1 = s.chain(vec![
        s.assoc(&pi1, &inv, &pi1)?,
        s.subs(left.clone(), &pi1)?,
        s.id_tgt(&pi1)?,
        s.sym(s.id_src(&pi1)?)?,
    ])?;

    // pi2 o (inv o pi1) == (pi2 o inv) o pi1 == final o pi1 == pi2 o id
    let fin_pi1 = Term::comp(&fin_x, &pi1)?;
    let pi2_id = Term::comp(&pi2, &id_xu)?;
    let on_pi2 = s.chain(vec![
        s.assoc(&pi1, &inv, &pi2)?,
        s.subs(pi2_inv, &pi1)?,
        s.upgrade(s.weak_final_unique(&fin_pi1, &pi2_id)?)?,
    ])?;

    let unicity = Proof::apply(
        sig,
        RuleName::WeakPairUnicity,
        Bindings::new(),
        vec![s.weaken(on_pi1)?, s.weaken(on_pi2)?],
    )?;
    let right = s.upgrade(unicity)?;
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{check_proof, Equation};
    use crate::memory::Loc;
    use crate::semantics::check_semantic;

    fn sig() -> MemorySignature {
        MemorySignature::from_pairs([("i", ["0", "1"]), ("j", ["0", "1"])]).unwrap()
    }

    fn vi() -> ObjTy {
        ObjTy::val("i")
    }

    fn vj() -> ObjTy {
        ObjTy::val("j")
    }

    fn checked(s: &MemorySignature, p: &Proof) -> Equation {
        check_proof(s, p).unwrap();
        assert!(
            check_semantic(s, &p.conclusion).unwrap().holds(),
            "semantically false: {}",
            p.conclusion
        );
        p.conclusion.clone()
    }

    #[test]
    fn derived_terms_typecheck() {
        let s = sig();
        let upd = Term::update(&s, &Loc::new("i")).unwrap();
        let look = Term::lookup(&s, &Loc::new("j")).unwrap();
        assert_eq!(inv_pi1(&s, &vi()).unwrap().cod(), &ObjTy::prod(vi(), ObjTy::Unit));
        assert_eq!(permut(&s, &vi(), &vj()).unwrap().cod(), &ObjTy::prod(vj(), vi()));
        let l = left_seq_prod(&s, &upd, &look).unwrap();
        let r = right_seq_prod(&s, &upd, &look).unwrap();
        assert_eq!(l.dom(), &ObjTy::prod(vi(), ObjTy::Unit));
        assert_eq!(l.cod(), &ObjTy::prod(ObjTy::Unit, vj()));
        assert_eq!((l.dom(), l.cod()), (r.dom(), r.cod()));
        // deterministic expansion
        assert_eq!(l, left_seq_prod(&s, &upd, &look).unwrap());
    }

    #[test]
    fn weak_refl_checks() {
        let s = sig();
        let upd = Term::update(&s, &Loc::new("i")).unwrap();
        let look = Term::lookup(&s, &Loc::new("j")).unwrap();
        for f in [
            upd.clone(),
            Term::id(&s, vi()).unwrap(),
            Term::comp(&look, &upd).unwrap(),
        ] {
            let c = checked(&s, &weak_refl(&s, &f).unwrap());
            assert_eq!(c, Equation::weak(f.clone(), f).unwrap());
        }
    }

    #[test]
    fn e_0_3_final_after_pi2() {
        let s = sig();
        let fin = Term::final_(&s, vj()).unwrap();
        let pi2 = Term::pi2(&s, ObjTy::Unit, vj()).unwrap();
        let pi1 = Term::pi1(&s, ObjTy::Unit, vj()).unwrap();
        let c = checked(&s, &e_0_3(&s, &fin, &pi2, &pi1).unwrap());
        assert_eq!(c.to_string(), "final[V(j)] o pi2[unit,V(j)] == pi1[unit,V(j)]");
    }

    #[test]
    fn e_0_3_rejects_modifiers() {
        let s = sig();
        let upd = Term::update(&s, &Loc::new("i")).unwrap();
        let id = Term::id(&s, ObjTy::Unit).unwrap();
        let fin = Term::final_(&s, vi()).unwrap();
        assert!(matches!(
            e_0_3(&s, &id, &upd, &fin),
            Err(DeriveError::SideConditionViolated { .. })
        ));
    }

    #[test]
    fn e_1_4_cases() {
        let s = sig();
        let look = Term::lookup(&s, &Loc::new("j")).unwrap();
        let c = checked(&s, &e_1_4(&s, &look).unwrap());
        assert_eq!(c.to_string(), "final[V(j)] o lookup j == id[unit]");
        checked(&s, &e_1_4(&s, &Term::id(&s, ObjTy::Unit).unwrap()).unwrap());
        let upd = Term::update(&s, &Loc::new("i")).unwrap();
        let bad = Term::comp(&upd, &look_i(&s)).unwrap();
        assert!(matches!(
            e_1_4(&s, &bad),
            Err(DeriveError::SideConditionViolated { .. })
        ));
    }

    fn look_i(s: &MemorySignature) -> Term {
        Term::lookup(s, &Loc::new("i")).unwrap()
    }

    #[test]
    fn pair_projection_variants() {
        let s = sig();
        let id_u = Term::id(&s, ObjTy::Unit).unwrap();
        let look = Term::lookup(&s, &Loc::new("j")).unwrap();
        let (p1, p2) = pair_projections(&s, &id_u, &look, Variant::PureRo).unwrap();
        assert_eq!(checked(&s, &p1).mode(), Mode::Strong);
        assert_eq!(checked(&s, &p2).mode(), Mode::Strong);

        let id_i = Term::id(&s, vi()).unwrap();
        let upd = Term::update(&s, &Loc::new("i")).unwrap();
        let (p1, p2) = pair_projections(&s, &id_i, &upd, Variant::PureRw).unwrap();
        assert_eq!(checked(&s, &p1).mode(), Mode::Weak);
        assert_eq!(checked(&s, &p2).mode(), Mode::Strong);

        assert!(matches!(
            pair_projections(&s, &upd, &id_i, Variant::RoPure),
            Err(DeriveError::SideConditionViolated { .. })
        ));
        // the kernel has no projection rule for a modifier first component
        assert!(matches!(
            pair_projections(&s, &upd, &id_i, Variant::RwPure),
            Err(DeriveError::SideConditionViolated { .. })
        ));
    }

    #[test]
    fn prod_projection_forms() {
        let s = sig();
        let id_i = Term::id(&s, vi()).unwrap();
        let look = Term::lookup(&s, &Loc::new("j")).unwrap();
        let (p1, p2) = prod_projections(&s, &id_i, &look, Variant::PureRw).unwrap();
        assert_eq!(
            checked(&s, &p1).to_string(),
            "pi1[V(i),V(j)] o pair(id[V(i)] o pi1[V(i),unit], lookup j o pi2[V(i),unit]) ~ id[V(i)] o pi1[V(i),unit]"
        );
        assert_eq!(checked(&s, &p2).mode(), Mode::Strong);
        let (p1, _) = prod_projections(&s, &id_i, &look, Variant::PureRo).unwrap();
        assert_eq!(checked(&s, &p1).mode(), Mode::Strong);
    }

    #[test]
    fn perm_prod_projection_forms() {
        let s = sig();
        let upd = Term::update(&s, &Loc::new("i")).unwrap();
        let id_j = Term::id(&s, vj()).unwrap();
        let (p1, p2) = perm_prod_projections(&s, &upd, &id_j, Variant::RwPure).unwrap();
        assert_eq!(checked(&s, &p1).mode(), Mode::Strong);
        assert_eq!(checked(&s, &p2).mode(), Mode::Weak);
        let pp = perm_prod(&s, &upd, &id_j).unwrap();
        assert_eq!(p1.conclusion.lhs().node(), &crate::terms::Node::Comp(
            Term::pi1(&s, ObjTy::Unit, vj()).unwrap(),
            pp,
        ));

        let f = Term::final_(&s, vi()).unwrap();
        let g = Term::id(&s, vj()).unwrap();
        let (p1, p2) = perm_prod_projections(&s, &f, &g, Variant::PurePure).unwrap();
        assert_eq!(checked(&s, &p1).mode(), Mode::Strong);
        assert_eq!(checked(&s, &p2).mode(), Mode::Strong);

        assert!(matches!(
            perm_prod_projections(&s, &id_j, &upd, Variant::PureRw),
            Err(DeriveError::SideConditionViolated { .. })
        ));
        assert!(matches!(
            perm_prod_projections(&s, &upd, &id_j, Variant::RoPure),
            Err(DeriveError::SideConditionViolated { .. })
        ));
    }

    #[test]
    fn inv_pi1_is_inverse() {
        let s = sig();
        for x in [vi(), ObjTy::Unit, ObjTy::prod(vi(), vj())] {
            let (l, r) = inv_pi1_iso(&s, &x).unwrap();
            let cl = checked(&s, &l);
            let cr = checked(&s, &r);
            assert_eq!(cl.mode(), Mode::Strong);
            assert_eq!(cr.mode(), Mode::Strong);
            assert_eq!(cl.rhs(), &Term::id(&s, x.clone()).unwrap());
            assert_eq!(cr.rhs(), &Term::id(&s, ObjTy::prod(x, ObjTy::Unit)).unwrap());
        }
    }
}
