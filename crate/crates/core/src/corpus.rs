//! Builders for the committed proof corpus under `corpus/`.
//!
//! Each builder renders script text and parses it back, so the files on disk
//! and the in-memory scripts come from one source. A golden test keeps the
//! two in sync.

use crate::kernel::RejectReason;
use crate::memory::{Loc, MemorySignature};
use crate::script::ProofScript;

/// The default signature: two locations with carrier `{0,1}`.
pub fn default_signature() -> MemorySignature {
    MemorySignature::from_pairs([("i", ["0", "1"]), ("j", ["0", "1"])]).expect("valid signature")
}

const COMMUTATION: &str = r#"# lookup J after update I, rewritten so that the lookup happens first:
#   lookup J o update I == pi2 o perm_prod(update I, id) o prod(id, lookup J) o inv_pi1
# Step labels follow the hand proof: step1 compares effects, step2 results.
name commutation_update_lookup
locations I:{0,1} J:{0,1}

let U = update I
let L = lookup J
let inv = inv_pi1[V(I)]
let P = prod(id[V(I)], L)
let Q = perm_prod(U, id[V(J)])
let W = Q o P o inv
let R = pi2[unit,V(J)] o W

goal L o U == R

lemma step1.1 : final[V(J)] o R == pi1[unit,V(J)] o W :=
  (strong_trans
    (assoc f=W g={pi2[unit,V(J)]} h={final[V(J)]})
    (strong_subs f=W (E_0_3 f={final[V(J)]} g={pi2[unit,V(J)]} h={pi1[unit,V(J)]})))

lemma step1.2 : pi1[unit,V(J)] o W == U o pi1[V(I),V(J)] o P o inv :=
  (strong_trans
    (assoc f={P o inv} g=Q h={pi1[unit,V(J)]})
    (strong_trans
      (strong_subs f={P o inv} (strong_perm_proj_pi1_rwpure_rect f=U g={id[V(J)]}))
      (strong_sym (assoc f={P o inv} g={pi1[V(I),V(J)]} h=U))))

lemma step1.3 : U o pi1[V(I),V(J)] o P o inv == U o pi1[V(I),unit] o inv :=
  (strong_repl g=U
    (strong_trans
      (assoc f=inv g=P h={pi1[V(I),V(J)]})
      (strong_subs f=inv
        (strong_trans
          (ro_weak_to_strong (weak_proj_pi1_purerw_rect f={id[V(I)]} g=L))
          (id_tgt f={pi1[V(I),unit]})))))

lemma step1.4 : U o pi1[V(I),unit] o inv == U o id[V(I)] :=
  (strong_repl g=U (strong_proj_pi1_purepure f1={id[V(I)]} f2={final[V(I)]}))

lemma step1.5 : final[V(J)] o L o U == U o id[V(I)] :=
  (strong_trans
    (assoc f=U g=L h={final[V(J)]})
    (strong_trans
      (strong_subs f=U (E_1_4 h=L))
      (strong_trans
        (id_tgt f=U)
        (strong_sym (id_src f=U)))))

lemma step1 : final[V(J)] o L o U == final[V(J)] o R :=
  (strong_sym
    (strong_trans step1.1
      (strong_trans step1.2
        (strong_trans step1.3
          (strong_trans step1.4 (strong_sym step1.5))))))

lemma step2.1 : L o U ~ L o final[V(I)] :=
  (axiom_2 i=J k=I)

lemma step2.2 : L o final[V(I)] ~ L o pi2[V(I),unit] o inv :=
  (weak_sym
    (strong_to_weak
      (strong_repl g=L (strong_proj_pi2_purepure f1={id[V(I)]} f2={final[V(I)]}))))

lemma step2.3 : R ~ pi2[V(I),V(J)] o P o inv :=
  (weak_trans
    (strong_to_weak (assoc f={P o inv} g=Q h={pi2[unit,V(J)]}))
    (weak_subs f={P o inv}
      (weak_trans
        (weak_perm_proj_pi2_rwpure_rect f=U g={id[V(J)]})
        (strong_to_weak (id_tgt f={pi2[V(I),V(J)]})))))

lemma step2.4 : pi2[V(I),V(J)] o P o inv ~ L o pi2[V(I),unit] o inv :=
  (strong_to_weak
    (strong_trans
      (assoc f=inv g=P h={pi2[V(I),V(J)]})
      (strong_trans
        (strong_subs f=inv (strong_proj_pi2_purerw_rect f={id[V(I)]} g=L))
        (strong_sym (assoc f=inv g={pi2[V(I),unit]} h=L)))))

lemma step2 : L o U ~ R :=
  (weak_trans step2.1
    (weak_trans step2.2
      (weak_trans (weak_sym step2.4) (weak_sym step2.3))))

proof := (comp_final_unique step1 step2)
"#;

/// Lemma labels of the commutation proof, in proof order.
pub const COMMUTATION_STEPS: [&str; 11] = [
    "step1", "step1.1", "step1.2", "step1.3", "step1.4", "step1.5", "step2", "step2.1", "step2.2",
    "step2.3", "step2.4",
];

fn render(template: &str, subst: &[(&str, &str)]) -> String {
    // placeholders are single capital letters standing alone as location names
    let mut out = String::with_capacity(template.len());
    let mut chars = template.chars().peekable();
    let mut prev_ident = false;
    while let Some(c) = chars.next() {
        let next_ident = chars.peek().is_some_and(|n| n.is_ascii_alphanumeric() || *n == '_');
        match subst.iter().find(|(k, _)| k.len() == 1 && k.starts_with(c)) {
            Some((_, v)) if !prev_ident && !next_ident => out.push_str(v),
            _ => out.push(c),
        }
        prev_ident = c.is_ascii_alphanumeric() || c == '_';
    }
    out
}

/// The update/lookup commutation proof for distinct locations `i` and `j`.
pub fn commutation_update_lookup(i: &Loc, j: &Loc) -> Result<ProofScript, RejectReason> {
    if i == j {
        return Err(RejectReason::LocationClash(i.clone()));
    }
    let src = render(COMMUTATION, &[("I", i.as_str()), ("J", j.as_str())]);
    Ok(ProofScript::parse(&src).expect("commutation template parses"))
}

fn header(name: &str, sig: &MemorySignature) -> String {
    format!("name {name}\n{sig}\n")
}

/// One-node axiom scripts for every location (and ordered pair of distinct
/// locations), followed by negative fixtures claiming the strong form of
/// the first axiom.
pub fn axiom_corpus(sig: &MemorySignature) -> Vec<(String, ProofScript)> {
    let mut out = Vec::new();
    let locs = sig.locations();
    for i in locs {
        let src = format!(
            "{}goal lookup {i} o update {i} ~ id[V({i})]\nproof := (axiom_1 i={i})\n",
            header(&format!("axiom_1_{i}"), sig)
        );
        out.push((format!("axiom_1_{i}"), src));
    }
    for i in locs {
        for k in locs.iter().filter(|k| *k != i) {
            let src = format!(
                "{}goal lookup {i} o update {k} ~ lookup {i} o final[V({k})]\nproof := (axiom_2 i={i} k={k})\n",
                header(&format!("axiom_2_{i}_{k}"), sig)
            );
            out.push((format!("axiom_2_{i}_{k}"), src));
        }
    }
    if let Some(i) = locs.first() {
        let goal = format!("goal lookup {i} o update {i} == id[V({i})]\n");
        let negatives = [
            (
                "strong_axiom_1_direct",
                "expect reject GoalMismatch\n",
                format!("proof := (axiom_1 i={i})\n"),
            ),
            (
                "strong_axiom_1_upgrade",
                "expect reject SideConditionViolated\n",
                format!("proof := (ro_weak_to_strong (axiom_1 i={i}))\n"),
            ),
            (
                "strong_axiom_1_final",
                "expect reject SchemaMismatch\n",
                format!(
                    "proof := (comp_final_unique\n  (strong_refl f={{final[V({i})] o lookup {i} o update {i}}})\n  (axiom_1 i={i}))\n"
                ),
            ),
            ("strong_axiom_1_refuted", "expect counterexample\n", String::new()),
        ];
        for (name, expect, proof) in negatives {
            let src = format!("{}{expect}{goal}{proof}", header(name, sig));
            out.push((name.to_string(), src));
        }
    }
    out.into_iter()
        .map(|(n, s)| {
            let script = ProofScript::parse(&s).expect("generated axiom script parses");
            (n, script)
        })
        .collect()
}

/// Every corpus file as `(relative path, contents)`.
pub fn corpus_files() -> Vec<(String, String)> {
    let sig = default_signature();
    let mut out = vec![
        ("default.sig".to_string(), format!("{sig}\n")),
        (
            "commutation.proof".to_string(),
            commutation_update_lookup(&Loc::new("i"), &Loc::new("j"))
                .expect("distinct")
                .source,
        ),
        (
            "eq1.eq".to_string(),
            "# update i then lookup j, against the lookup-first form\n\
             locations i:{0,1} j:{0,1}\n\
             lookup j o update i == pi2 o perm_prod(update i, id[V(j)]) o prod(id[V(i)], lookup j) o inv_pi1[V(i)]\n"
                .to_string(),
        ),
        (
            "seq_product.eq".to_string(),
            "# both evaluation orders agree when the locations differ\n\
             locations i:{0,1} j:{0,1}\n\
             right_seq_prod(update i, lookup j) == left_seq_prod(update i, lookup j)\n"
                .to_string(),
        ),
        (
            "strong_axiom_1.eq".to_string(),
            "locations i:{0,1} j:{0,1}\nlookup i o update i == id[V(i)]\n".to_string(),
        ),
        (
            "inv_pi1_iso.proof".to_string(),
            format!(
                "name inv_pi1_iso\n{sig}\n\
                 lemma left : pi1 o inv_pi1[V(i)] == id[V(i)] := (inv_pi1_iso_left x=[V(i)])\n\
                 goal inv_pi1[V(i)] o pi1 == id[V(i)*unit]\n\
                 proof := (inv_pi1_iso_right x=[V(i)])\n"
            ),
        ),
    ];
    for (name, script) in axiom_corpus(&sig) {
        out.push((format!("{name}.proof"), script.source));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::RuleName;
    use crate::script::{check_script, replay};

    #[test]
    fn commutation_checks() {
        let sig = default_signature();
        let s = commutation_update_lookup(&Loc::new("i"), &Loc::new("j")).unwrap();
        let c = check_script(&s, &sig).unwrap();
        assert_eq!(c.proof.rule, RuleName::CompFinalUnique);
        let mut labels = c.proof.labels();
        labels.sort();
        let mut want = COMMUTATION_STEPS.to_vec();
        want.sort();
        assert_eq!(labels, want);
        assert!(replay(&s, &sig).ok);
    }

    #[test]
    fn commutation_other_direction() {
        let sig = default_signature();
        let s = commutation_update_lookup(&Loc::new("j"), &Loc::new("i")).unwrap();
        assert!(replay(&s, &sig).ok);
    }

    #[test]
    fn commutation_needs_distinct_locations() {
        let i = Loc::new("i");
        assert_eq!(
            commutation_update_lookup(&i, &i).unwrap_err(),
            RejectReason::LocationClash(i)
        );
    }

    #[test]
    fn axiom_corpus_replays() {
        let sig = default_signature();
        let all = axiom_corpus(&sig);
        assert_eq!(all.len(), 2 + 2 + 4);
        for (name, s) in &all {
            let r = replay(s, &sig);
            assert!(r.ok, "{name}: {:?}", r.check.err());
        }
    }

    #[test]
    fn render_only_touches_placeholders() {
        assert_eq!(
            render("let I = V(I) o Id I_x", &[("I", "a")]),
            "let a = V(a) o Id I_x"
        );
    }
}
