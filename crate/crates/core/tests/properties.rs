use deco_state::corpus::default_signature;
use deco_state::decorations::{has_kind, infer_kind, Kind};
use deco_state::kernel::{check_proof, Bindings, Proof, RuleName};
use deco_state::memory::{Loc, MemorySignature, Store};
use deco_state::semantics::{check_semantic, enumerate_values, eval, SemValue};
use deco_state::syntax::{parse_equation, parse_term};
use deco_state::terms::{Node, ObjTy, Term};
use proptest::prelude::*;

fn types() -> Vec<ObjTy> {
    let (vi, vj) = (ObjTy::val("i"), ObjTy::val("j"));
    vec![
        ObjTy::Unit,
        vi.clone(),
        vj.clone(),
        ObjTy::prod(vi.clone(), vj.clone()),
        ObjTy::prod(vj, ObjTy::Unit),
        ObjTy::prod(vi.clone(), vi),
    ]
}

/// Builds a term of type `dom -> cod`, steered by `choices`. Once the choices
/// run out or the depth budget is spent, falls back to a canonical term.
struct Gen<'a> {
    sig: &'a MemorySignature,
    choices: std::slice::Iter<'a, u8>,
    pure: bool,
}

impl Gen<'_> {
    fn next(&mut self) -> Option<usize> {
        self.choices.next().map(|c| *c as usize)
    }

    fn canonical(&mut self, dom: &ObjTy, cod: &ObjTy) -> Term {
        if dom == cod {
            return Term::id(self.sig, dom.clone()).unwrap();
        }
        match cod {
            ObjTy::Unit => Term::final_(self.sig, dom.clone()).unwrap(),
            ObjTy::Val(_) if self.pure => match project(self.sig, dom, cod) {
                Some(t) => t,
                None => self.canonical_effect(dom, cod),
            },
            ObjTy::Val(_) => self.canonical_effect(dom, cod),
            ObjTy::Prod(a, b) => {
                let f = self.canonical(dom, a);
                let g = self.canonical(dom, b);
                Term::pair(&f, &g).unwrap()
            }
        }
    }

    fn canonical_effect(&mut self, dom: &ObjTy, cod: &ObjTy) -> Term {
        match cod {
            ObjTy::Val(l) => {
                let fin = Term::final_(self.sig, dom.clone()).unwrap();
                Term::comp(&Term::lookup(self.sig, l).unwrap(), &fin).unwrap()
            }
            _ => unreachable!(),
        }
    }

    fn term(&mut self, dom: &ObjTy, cod: &ObjTy, depth: usize) -> Term {
        let Some(c) = self.next() else {
            return self.canonical(dom, cod);
        };
        if depth == 0 {
            return self.leaf(dom, cod, c).unwrap_or_else(|| self.canonical(dom, cod));
        }
        match c % 4 {
            0 => self.leaf(dom, cod, c / 4).unwrap_or_else(|| self.canonical(dom, cod)),
            1 => {
                let tys = if self.pure { components(dom) } else { types() };
                let mid = tys[self.next().unwrap_or(0) % tys.len()].clone();
                let f = self.term(dom, &mid, depth - 1);
                let g = self.term(&mid, cod, depth - 1);
                Term::comp(&g, &f).unwrap()
            }
            2 => match cod {
                ObjTy::Prod(a, b) => {
                    let f = self.term(dom, a, depth - 1);
                    let g = self.term(dom, b, depth - 1);
                    Term::pair(&f, &g).unwrap()
                }
                _ => self.through_unit(dom, cod, depth),
            },
            _ => self.through_unit(dom, cod, depth),
        }
    }

    // route through an effect: dom -> unit -> cod
    fn through_unit(&mut self, dom: &ObjTy, cod: &ObjTy, depth: usize) -> Term {
        if self.pure {
            return self.leaf(dom, cod, 0).unwrap_or_else(|| self.canonical(dom, cod));
        }
        let f = self.term(dom, &ObjTy::Unit, depth - 1);
        let g = self.term(&ObjTy::Unit, cod, depth - 1);
        Term::comp(&g, &f).unwrap()
    }

    fn leaf(&mut self, dom: &ObjTy, cod: &ObjTy, c: usize) -> Option<Term> {
        let sig = self.sig;
        let mut options = Vec::new();
        if dom == cod {
            options.push(Term::id(sig, dom.clone()).unwrap());
        }
        if *cod == ObjTy::Unit {
            options.push(Term::final_(sig, dom.clone()).unwrap());
        }
        if let ObjTy::Prod(a, b) = dom {
            if **a == *cod {
                options.push(Term::pi1(sig, (**a).clone(), (**b).clone()).unwrap());
            }
            if **b == *cod {
                options.push(Term::pi2(sig, (**a).clone(), (**b).clone()).unwrap());
            }
        }
        match (dom, cod) {
            _ if self.pure => {}
            (ObjTy::Unit, ObjTy::Val(l)) => options.push(Term::lookup(sig, l).unwrap()),
            (ObjTy::Val(l), ObjTy::Unit) => options.push(Term::update(sig, l).unwrap()),
            _ => {}
        }
        if options.is_empty() {
            None
        } else {
            Some(options.swap_remove(c % options.len()))
        }
    }
}

/// `dom` itself, unit, and every component reachable by projections.
fn components(dom: &ObjTy) -> Vec<ObjTy> {
    let mut out = vec![dom.clone(), ObjTy::Unit];
    if let ObjTy::Prod(a, b) = dom {
        out.extend(components(a));
        out.extend(components(b));
    }
    out
}

fn project(sig: &MemorySignature, dom: &ObjTy, cod: &ObjTy) -> Option<Term> {
    if dom == cod {
        return Some(Term::id(sig, dom.clone()).unwrap());
    }
    let ObjTy::Prod(a, b) = dom else { return None };
    let (a, b) = ((**a).clone(), (**b).clone());
    if let Some(t) = project(sig, &a, cod) {
        return Some(Term::comp(&t, &Term::pi1(sig, a, b).unwrap()).unwrap());
    }
    let t = project(sig, &b, cod)?;
    Some(Term::comp(&t, &Term::pi2(sig, a, b).unwrap()).unwrap())
}

fn gen_term(sig: &MemorySignature, dom: &ObjTy, cod: &ObjTy, choices: &[u8]) -> Term {
    Gen { sig, choices: choices.iter(), pure: false }.term(dom, cod, 4)
}

fn arb_pure_term() -> impl Strategy<Value = Term> {
    let doms = vec![
        ObjTy::prod(ObjTy::val("i"), ObjTy::val("j")),
        ObjTy::prod(ObjTy::prod(ObjTy::val("j"), ObjTy::Unit), ObjTy::val("i")),
    ];
    (prop::sample::select(doms), any::<prop::sample::Index>(), prop::collection::vec(any::<u8>(), 0..40)).prop_map(
        |(d, ix, ch)| {
            let sig = default_signature();
            let cod = ix.get(&components(&d)).clone();
            Gen { sig: &sig, choices: ch.iter(), pure: true }.term(&d, &cod, 4)
        },
    )
}

fn arb_ty() -> impl Strategy<Value = ObjTy> {
    prop::sample::select(types())
}

fn arb_term() -> impl Strategy<Value = Term> {
    (arb_ty(), arb_ty(), prop::collection::vec(any::<u8>(), 0..40))
        .prop_map(|(d, c, ch)| gen_term(&default_signature(), &d, &c, &ch))
}

fn arb_store(sig: &MemorySignature) -> impl Strategy<Value = Store> {
    let all: Vec<Store> = sig.stores().collect();
    prop::sample::select(all)
}

fn arb_signature() -> impl Strategy<Value = MemorySignature> {
    prop::collection::vec(1usize..=3, 1..=3).prop_map(|sizes| {
        let entries: Vec<(String, Vec<String>)> = sizes
            .iter()
            .enumerate()
            .map(|(n, k)| (format!("l{n}"), (0..*k).map(|v| v.to_string()).collect()))
            .collect();
        MemorySignature::from_pairs(entries).unwrap()
    })
}

fn results_on(sig: &MemorySignature, t: &Term) -> Vec<(SemValue, Store, SemValue, Store)> {
    let mut out = Vec::new();
    for x in enumerate_values(sig, t.dom()) {
        for s in sig.stores() {
            let (r, s1) = eval(sig, t, &x, &s).unwrap();
            out.push((x.clone(), s, r, s1));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn store_count_is_carrier_product(sig in arb_signature()) {
        let want: usize = sig.locations().iter().map(|l| sig.carrier(l).unwrap().len()).product();
        prop_assert_eq!(sig.store_count(), want);
        let stores: Vec<Store> = sig.stores().collect();
        prop_assert_eq!(stores.len(), want);
        let distinct: std::collections::HashSet<_> = stores.iter().cloned().collect();
        prop_assert_eq!(distinct.len(), want);
    }

    #[test]
    fn generated_terms_are_well_typed(t in arb_term()) {
        prop_assert!(t.validate(&default_signature()).is_ok());
    }

    #[test]
    fn accessors_leave_the_store_alone(t in arb_term()) {
        let sig = default_signature();
        let k = infer_kind(&t);
        for (_, s, _, s1) in results_on(&sig, &t) {
            if k <= Kind::Ro {
                prop_assert_eq!(&s, &s1, "{} changed the store", t);
            }
        }
    }

    #[test]
    fn pure_terms_ignore_the_store(t in arb_pure_term()) {
        prop_assume!(infer_kind(&t) == Kind::Pure);
        let sig = default_signature();
        let stores: Vec<Store> = sig.stores().collect();
        for x in enumerate_values(&sig, t.dom()) {
            let first = eval(&sig, &t, &x, &stores[0]).unwrap().0;
            for s in &stores[1..] {
                prop_assert_eq!(&eval(&sig, &t, &x, s).unwrap().0, &first);
            }
        }
    }

    #[test]
    fn lookup_after_update_reads_back(s in arb_store(&default_signature()), v in 0usize..2, l in prop::sample::select(vec!["i", "j"])) {
        let sig = default_signature();
        let loc = Loc::new(l);
        let x = enumerate_values(&sig, &ObjTy::val(l))[v].clone();
        let t = Term::comp(&Term::lookup(&sig, &loc).unwrap(), &Term::update(&sig, &loc).unwrap()).unwrap();
        let (r, s1) = eval(&sig, &t, &x, &s).unwrap();
        prop_assert_eq!(r, x);
        // only the updated location moves
        let ix = sig.index_of(&loc).unwrap();
        for n in 0..sig.len() {
            if n != ix {
                prop_assert_eq!(s.get(n), s1.get(n));
            }
        }
    }

    #[test]
    fn printed_terms_parse_back(t in arb_term()) {
        let sig = default_signature();
        let back = parse_term(&t.to_string(), &sig).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn printed_equations_parse_back(t in arb_term(), ch in prop::collection::vec(any::<u8>(), 0..40), strong in any::<bool>()) {
        let sig = default_signature();
        let u = gen_term(&sig, t.dom(), t.cod(), &ch);
        let eq = if strong {
            deco_state::kernel::Equation::strong(t, u)
        } else {
            deco_state::kernel::Equation::weak(t, u)
        }.unwrap();
        prop_assert_eq!(parse_equation(&eq.to_string(), &sig).unwrap(), eq);
    }

    #[test]
    fn kinds_are_upward_closed(t in arb_term()) {
        let k = infer_kind(&t);
        for j in Kind::ALL {
            prop_assert_eq!(has_kind(&t, j), k <= j);
        }
        let children: Vec<&Term> = match t.node() {
            Node::Comp(a, b) | Node::Pair(a, b) => vec![a, b],
            _ => vec![],
        };
        for c in children {
            prop_assert!(infer_kind(c) <= k);
        }
    }

    #[test]
    fn checked_proofs_are_sound(
        f in arb_term(),
        chg in prop::collection::vec(any::<u8>(), 0..30),
        chh in prop::collection::vec(any::<u8>(), 0..30),
        cod2 in arb_ty(),
        cod3 in arb_ty(),
        steps in prop::collection::vec((0usize..8, prop::collection::vec(any::<u8>(), 0..20), arb_ty()), 0..5),
    ) {
        let sig = default_signature();
        let g = gen_term(&sig, f.cod(), &cod2, &chg);
        let h = gen_term(&sig, g.cod(), &cod3, &chh);
        let f2 = gen_term(&sig, f.dom(), &cod2, &chg);
        let seeds = [
            Proof::apply(&sig, RuleName::Assoc, Bindings::new().term("f", &f).term("g", &g).term("h", &h), vec![]),
            Proof::apply(&sig, RuleName::IdSrc, Bindings::new().term("f", &f), vec![]),
            Proof::apply(&sig, RuleName::WeakFinalUnique, Bindings::new().term("f", &f).term("g", &f2), vec![]),
            Proof::apply(&sig, RuleName::WeakProjPi1, Bindings::new().term("f1", &f).term("f2", &f2), vec![]),
            Proof::apply(&sig, RuleName::StrongProjPi2, Bindings::new().term("f1", &f).term("f2", &f2), vec![]),
        ];
        for seed in seeds.into_iter().flatten() {
            let mut p = seed;
            for (op, ch, cod) in &steps {
                let extend = |dom: &ObjTy, cod: &ObjTy| gen_term(&sig, dom, cod, ch);
                let c = &p.conclusion;
                let next = match op {
                    0 => Proof::apply(&sig, RuleName::StrongSym, Bindings::new(), vec![p.clone()]),
                    1 => Proof::apply(&sig, RuleName::WeakSym, Bindings::new(), vec![p.clone()]),
                    2 => Proof::apply(&sig, RuleName::StrongToWeak, Bindings::new(), vec![p.clone()]),
                    3 => Proof::apply(&sig, RuleName::StrongSubs, Bindings::new().term("f", &extend(cod, c.lhs().dom())), vec![p.clone()]),
                    4 => Proof::apply(&sig, RuleName::WeakSubs, Bindings::new().term("f", &extend(cod, c.lhs().dom())), vec![p.clone()]),
                    5 => Proof::apply(&sig, RuleName::StrongRepl, Bindings::new().term("g", &extend(c.lhs().cod(), cod)), vec![p.clone()]),
                    6 => Proof::apply(&sig, RuleName::PureWeakRepl, Bindings::new().term("g", &extend(c.lhs().cod(), cod)), vec![p.clone()]),
                    _ => Proof::apply(&sig, RuleName::RoWeakToStrong, Bindings::new(), vec![p.clone()]),
                };
                if let Ok(n) = next {
                    p = n;
                }
            }
            prop_assert!(check_proof(&sig, &p).is_ok());
            prop_assert!(check_semantic(&sig, &p.conclusion).unwrap().holds(), "unsound: {}", p.conclusion);
        }
    }
}
