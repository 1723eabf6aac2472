//! Randomized soundness sweep over the kernel rules.
//!
//! A seeded pool of well-typed terms is bucketed by semantic fingerprint, so
//! premises drawn from one bucket hold by construction. Each instance is fed
//! to [`check_step`]; accepted conclusions are then decided semantically.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decorations::{has_kind, Kind};
use crate::kernel::{check_step, Bindings, Equation, Mode, RuleName};
use crate::memory::{MemorySignature, Store};
use crate::semantics::{check_semantic, graph, SemValue, SemanticVerdict};
use crate::terms::{ObjTy, Term};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub seed: u64,
    /// Accepted instances wanted per rule.
    pub per_rule: usize,
    /// Maximum depth of generated terms (leaves have depth 1).
    pub max_depth: usize,
    /// Combination attempts per pool level.
    pub pool_attempts: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: DEFAULT_SEED,
            per_rule: 1000,
            max_depth: 4,
            pool_attempts: 6000,
        }
    }
}

type Key = (ObjTy, ObjTy);

/// Terms grouped by type and by strong and weak semantic fingerprint.
pub struct TermPool {
    terms: Vec<Term>,
    by_dom: HashMap<ObjTy, Vec<usize>>,
    by_cod: HashMap<ObjTy, Vec<usize>>,
    strong: Vec<Vec<usize>>,
    weak: Vec<Vec<usize>>,
    strong_of: Vec<usize>,
    weak_of: Vec<usize>,
}

fn base_types(sig: &MemorySignature) -> Vec<ObjTy> {
    let mut base = vec![ObjTy::Unit];
    base.extend(sig.locations().iter().cloned().map(ObjTy::Val));
    let mut all = base.clone();
    for a in &base {
        for b in &base {
            all.push(ObjTy::prod(a.clone(), b.clone()));
        }
    }
    all
}

impl TermPool {
    pub fn build(sig: &MemorySignature, rng: &mut ChaCha8Rng, cfg: &SweepConfig) -> TermPool {
        let types = base_types(sig);
        let allowed: HashSet<&ObjTy> = types.iter().collect();
        let mut seen: HashSet<Term> = HashSet::new();
        let mut terms: Vec<Term> = Vec::new();
        let mut push = |t: Term, terms: &mut Vec<Term>| {
            if seen.insert(t.clone()) {
                terms.push(t);
            }
        };
        for x in &types {
            push(Term::id(sig, x.clone()).unwrap(), &mut terms);
            push(Term::final_(sig, x.clone()).unwrap(), &mut terms);
            if let Some((a, b)) = x.as_prod() {
                push(Term::pi1(sig, a.clone(), b.clone()).unwrap(), &mut terms);
                push(Term::pi2(sig, a.clone(), b.clone()).unwrap(), &mut terms);
            }
        }
        for l in sig.locations() {
            push(Term::lookup(sig, l).unwrap(), &mut terms);
            push(Term::update(sig, l).unwrap(), &mut terms);
        }
        for depth in 2..=cfg.max_depth {
            let lower: Vec<Term> = terms.iter().filter(|t| t.depth() < depth).cloned().collect();
            let mut by_dom: HashMap<&ObjTy, Vec<&Term>> = HashMap::new();
            for t in &lower {
                by_dom.entry(t.dom()).or_default().push(t);
            }
            for _ in 0..cfg.pool_attempts {
                let f = lower.choose(rng).unwrap();
                let made = if rng.random_bool(0.7) {
                    by_dom
                        .get(f.cod())
                        .and_then(|gs| gs.choose(rng))
                        .and_then(|g| Term::comp(g, f).ok())
                } else {
                    by_dom
                        .get(f.dom())
                        .and_then(|gs| gs.choose(rng))
                        .and_then(|g| Term::pair(f, g).ok())
                };
                if let Some(t) = made {
                    if t.depth() <= depth && allowed.contains(t.cod()) {
                        push(t, &mut terms);
                    }
                }
            }
        }

        let mut by_dom: HashMap<ObjTy, Vec<usize>> = HashMap::new();
        let mut by_cod: HashMap<ObjTy, Vec<usize>> = HashMap::new();
        type Graph = Vec<(SemValue, Store)>;
        let mut strong_ix: HashMap<(Key, Graph), usize> = HashMap::new();
        let mut weak_ix: HashMap<(Key, Vec<SemValue>), usize> = HashMap::new();
        let (mut strong, mut weak) = (Vec::<Vec<usize>>::new(), Vec::<Vec<usize>>::new());
        let (mut strong_of, mut weak_of) = (Vec::new(), Vec::new());
        for (n, t) in terms.iter().enumerate() {
            by_dom.entry(t.dom().clone()).or_default().push(n);
            by_cod.entry(t.cod().clone()).or_default().push(n);
            let g = graph(sig, t).expect("pool terms are valid");
            let key = (t.dom().clone(), t.cod().clone());
            let results: Vec<SemValue> = g.iter().map(|(v, _)| v.clone()).collect();
            let s = *strong_ix.entry((key.clone(), g)).or_insert_with(|| {
                strong.push(Vec::new());
                strong.len() - 1
            });
            strong[s].push(n);
            strong_of.push(s);
            let w = *weak_ix.entry((key, results)).or_insert_with(|| {
                weak.push(Vec::new());
                weak.len() - 1
            });
            weak[w].push(n);
            weak_of.push(w);
        }
        TermPool {
            terms,
            by_dom,
            by_cod,
            strong,
            weak,
            strong_of,
            weak_of,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    fn any(&self, rng: &mut ChaCha8Rng, ok: impl Fn(&Term) -> bool) -> Option<Term> {
        (0..200)
            .map(|_| self.terms.choose(rng).unwrap())
            .find(|t| ok(t))
            .cloned()
    }

    fn with_dom(&self, rng: &mut ChaCha8Rng, x: &ObjTy, ok: impl Fn(&Term) -> bool) -> Option<Term> {
        let ix = self.by_dom.get(x)?;
        (0..200)
            .map(|_| &self.terms[*ix.choose(rng).unwrap()])
            .find(|t| ok(t))
            .cloned()
    }

    fn with_cod(&self, rng: &mut ChaCha8Rng, y: &ObjTy, ok: impl Fn(&Term) -> bool) -> Option<Term> {
        let ix = self.by_cod.get(y)?;
        (0..200)
            .map(|_| &self.terms[*ix.choose(rng).unwrap()])
            .find(|t| ok(t))
            .cloned()
    }

    /// `n` terms from one bucket of the given equality, all passing `ok`.
    /// Buckets with several distinct members are preferred.
    fn related(
        &self,
        rng: &mut ChaCha8Rng,
        mode: Mode,
        n: usize,
        ok: impl Fn(&Term) -> bool,
    ) -> Option<Vec<Term>> {
        let (buckets, of) = match mode {
            Mode::Strong => (&self.strong, &self.strong_of),
            Mode::Weak => (&self.weak, &self.weak_of),
        };
        for _ in 0..200 {
            let seed = rng.random_range(0..self.terms.len());
            if !ok(&self.terms[seed]) {
                continue;
            }
            let members: Vec<usize> = buckets[of[seed]]
                .iter()
                .copied()
                .filter(|&m| ok(&self.terms[m]))
                .collect();
            if members.len() < 2 && rng.random_bool(0.8) {
                continue;
            }
            return Some(
                (0..n)
                    .map(|_| self.terms[*members.choose(rng).unwrap()].clone())
                    .collect(),
            );
        }
        None
    }
}

/// One generated rule instance.
struct Instance {
    bindings: Bindings,
    premises: Vec<Equation>,
}

fn eqs(pairs: &[(Term, Term, Mode)]) -> Vec<Equation> {
    pairs
        .iter()
        .map(|(a, b, m)| Equation::new(a.clone(), b.clone(), *m).expect("parallel by construction"))
        .collect()
}

fn comp(g: &Term, f: &Term) -> Term {
    Term::comp(g, f).expect("composable by construction")
}

fn instance(
    sig: &MemorySignature,
    pool: &TermPool,
    rng: &mut ChaCha8Rng,
    rule: RuleName,
) -> Option<Instance> {
    use Mode::{Strong, Weak};
    use RuleName::*;
    let b = Bindings::new();
    let any = |_: &Term| true;
    let mode_of = |r: RuleName| match r {
        StrongSym | StrongTrans | StrongSubs | StrongRepl | StrongToWeak => Strong,
        _ => Weak,
    };
    let inst = match rule {
        StrongRefl | IdSrc | IdTgt => Instance {
            bindings: b.term("f", &pool.any(rng, any)?),
            premises: vec![],
        },
        Assoc => {
            let f = pool.any(rng, any)?;
            let g = pool.with_dom(rng, f.cod(), any)?;
            let h = pool.with_dom(rng, g.cod(), any)?;
            Instance {
                bindings: b.term("f", &f).term("g", &g).term("h", &h),
                premises: vec![],
            }
        }
        StrongSym | WeakSym | StrongToWeak => {
            let p = pool.related(rng, mode_of(rule), 2, any)?;
            Instance {
                bindings: b,
                premises: eqs(&[(p[0].clone(), p[1].clone(), mode_of(rule))]),
            }
        }
        StrongTrans | WeakTrans => {
            let m = mode_of(rule);
            let p = pool.related(rng, m, 3, any)?;
            Instance {
                bindings: b,
                premises: eqs(&[(p[0].clone(), p[1].clone(), m), (p[1].clone(), p[2].clone(), m)]),
            }
        }
        StrongSubs | WeakSubs => {
            let m = mode_of(rule);
            let p = pool.related(rng, m, 2, any)?;
            let f = pool.with_cod(rng, p[0].dom(), any)?;
            Instance {
                bindings: b.term("f", &f),
                premises: eqs(&[(p[0].clone(), p[1].clone(), m)]),
            }
        }
        StrongRepl | PureWeakRepl => {
            let m = mode_of(rule);
            let p = pool.related(rng, m, 2, any)?;
            let g = if rule == PureWeakRepl {
                pool.with_dom(rng, p[0].cod(), |t| has_kind(t, Kind::Pure))?
            } else {
                pool.with_dom(rng, p[0].cod(), any)?
            };
            Instance {
                bindings: b.term("g", &g),
                premises: eqs(&[(p[0].clone(), p[1].clone(), m)]),
            }
        }
        RoWeakToStrong => {
            let p = pool.related(rng, Weak, 2, |t| has_kind(t, Kind::Ro))?;
            Instance {
                bindings: b,
                premises: eqs(&[(p[0].clone(), p[1].clone(), Weak)]),
            }
        }
        WeakFinalUnique => {
            let f = pool.with_cod(rng, &ObjTy::Unit, any)?;
            let g = pool.with_dom(rng, f.dom(), |t| *t.cod() == ObjTy::Unit)?;
            Instance {
                bindings: b.term("f", &f).term("g", &g),
                premises: vec![],
            }
        }
        CompFinalUnique => {
            // same effect and same result
            let p = pool.related(rng, Strong, 2, any)?;
            let fin = Term::final_(sig, p[0].cod().clone()).ok()?;
            Instance {
                bindings: b,
                premises: eqs(&[
                    (comp(&fin, &p[0]), comp(&fin, &p[1]), Strong),
                    (p[0].clone(), p[1].clone(), Weak),
                ]),
            }
        }
        WeakProjPi1 | StrongProjPi2 => {
            let f1 = pool.any(rng, |t| has_kind(t, Kind::Ro))?;
            let f2 = pool.with_dom(rng, f1.dom(), any)?;
            Instance {
                bindings: b.term("f1", &f1).term("f2", &f2),
                premises: vec![],
            }
        }
        WeakPairUnicity => {
            let p = pool.related(rng, Weak, 2, |t| t.cod().as_prod().is_some())?;
            let (y1, y2) = p[0].cod().as_prod().unwrap();
            let pi1 = Term::pi1(sig, y1.clone(), y2.clone()).ok()?;
            let pi2 = Term::pi2(sig, y1.clone(), y2.clone()).ok()?;
            Instance {
                bindings: b,
                premises: eqs(&[
                    (comp(&pi1, &p[0]), comp(&pi1, &p[1]), Weak),
                    (comp(&pi2, &p[0]), comp(&pi2, &p[1]), Weak),
                ]),
            }
        }
        Axiom1 => Instance {
            bindings: b.loc("i", sig.locations().choose(rng)?),
            premises: vec![],
        },
        Axiom2 => {
            let i = sig.locations().choose(rng)?;
            let k = sig.locations().iter().filter(|k| *k != i).collect::<Vec<_>>();
            Instance {
                bindings: b.loc("i", i).loc("k", k.choose(rng)?),
                premises: vec![],
            }
        }
        LocalToGlobal => {
            // same final store everywhere, hence every lookup agrees
            let p = pool.related(rng, Strong, 2, |t| *t.cod() == ObjTy::Unit)?;
            let premises = sig
                .locations()
                .iter()
                .map(|l| {
                    let look = Term::lookup(sig, l).unwrap();
                    (comp(&look, &p[0]), comp(&look, &p[1]), Weak)
                })
                .collect::<Vec<_>>();
            Instance {
                bindings: b,
                premises: eqs(&premises),
            }
        }
    };
    Some(inst)
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub rule: String,
    pub premises: Vec<String>,
    pub conclusion: String,
    pub counterexample: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleStats {
    pub rule: String,
    pub accepted: usize,
    pub rejected: usize,
    /// Generated premises that did not hold; a generator bug if nonzero.
    pub invalid_premises: usize,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub per_rule: usize,
    pub pool_size: usize,
    pub rules: Vec<RuleStats>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SweepReport {
    pub fn violations(&self) -> usize {
        self.rules.iter().map(|r| r.violations.len()).sum()
    }

    /// Every rule reached its quota with no violation and no invalid premise.
    pub fn passed(&self) -> bool {
        self.rules
            .iter()
            .all(|r| r.accepted >= self.per_rule && r.violations.is_empty() && r.invalid_premises == 0)
    }
}

pub fn sweep(sig: &MemorySignature, cfg: &SweepConfig) -> SweepReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pool = TermPool::build(sig, &mut rng, cfg);
    let mut rules = Vec::new();
    for &rule in RuleName::ALL {
        let mut st = RuleStats {
            rule: rule.camel_name().to_string(),
            accepted: 0,
            rejected: 0,
            invalid_premises: 0,
            violations: Vec::new(),
        };
        let mut attempts = 0;
        while st.accepted < cfg.per_rule && attempts < cfg.per_rule * 20 {
            attempts += 1;
            let Some(inst) = instance(sig, &pool, &mut rng, rule) else {
                continue;
            };
            let premises_hold = inst
                .premises
                .iter()
                .all(|p| check_semantic(sig, p).is_ok_and(|v| v.holds()));
            if !premises_hold {
                st.invalid_premises += 1;
                continue;
            }
            let refs: Vec<&Equation> = inst.premises.iter().collect();
            match check_step(sig, rule, &inst.bindings, &refs) {
                Err(_) => st.rejected += 1,
                Ok(concl) => {
                    st.accepted += 1;
                    if let Ok(SemanticVerdict::Counterexample(c)) = check_semantic(sig, &concl) {
                        st.violations.push(Violation {
                            rule: st.rule.clone(),
                            premises: inst.premises.iter().map(|p| p.to_string()).collect(),
                            conclusion: concl.to_string(),
                            counterexample: c.show(sig),
                        });
                    }
                }
            }
        }
        rules.push(st);
    }
    SweepReport {
        seed: cfg.seed,
        per_rule: cfg.per_rule,
        pool_size: pool.len(),
        rules,
        elapsed: start.elapsed(),
    }
}
