//! The decoration lattice `pure < ro < rw` and least-decoration inference.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::terms::{Node, Term};

/// How a term may interact with the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    /// Neither reads nor writes the state.
    Pure,
    /// Accessor: may read the state.
    Ro,
    /// Modifier: may read and write the state.
    Rw,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Pure, Kind::Ro, Kind::Rw];

    pub fn join(self, other: Kind) -> Kind {
        self.max(other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Pure => "pure",
            Kind::Ro => "ro",
            Kind::Rw => "rw",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pure" => Ok(Kind::Pure),
            "ro" => Ok(Kind::Ro),
            "rw" => Ok(Kind::Rw),
            other => Err(format!("unknown kind `{other}`")),
        }
    }
}

/// The least kind `k` such that the term can be decorated with `k`.
pub fn infer_kind(t: &Term) -> Kind {
    match t.node() {
        Node::Id | Node::Final | Node::Pi1 | Node::Pi2 => Kind::Pure,
        Node::Lookup(_) => Kind::Ro,
        Node::Update(_) => Kind::Rw,
        Node::Comp(a, b) | Node::Pair(a, b) => infer_kind(a).join(infer_kind(b)),
    }
}

/// Whether `t` may be decorated with `k`, using the hierarchy
/// `pure => ro => rw`.
pub fn has_kind(t: &Term, k: Kind) -> bool {
    infer_kind(t) <= k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::{Loc, MemorySignature};
    use crate::terms::ObjTy;

    fn sig() -> MemorySignature {
        MemorySignature::from_pairs([("i", ["0", "1"]), ("j", ["0", "1"])]).unwrap()
    }

    #[test]
    fn leaves() {
        let s = sig();
        let i = Loc::new("i");
        assert_eq!(infer_kind(&Term::update(&s, &i).unwrap()), Kind::Rw);
        assert_eq!(infer_kind(&Term::lookup(&s, &i).unwrap()), Kind::Ro);
        assert_eq!(infer_kind(&Term::id(&s, ObjTy::Unit).unwrap()), Kind::Pure);
    }

    #[test]
    fn composite_joins() {
        let s = sig();
        let t = Term::comp(
            &Term::lookup(&s, &Loc::new("j")).unwrap(),
            &Term::update(&s, &Loc::new("i")).unwrap(),
        )
        .unwrap();
        assert_eq!(infer_kind(&t), Kind::Rw);
        let vi = ObjTy::val("i");
        let p = Term::pair(
            &Term::id(&s, vi.clone()).unwrap(),
            &Term::final_(&s, vi).unwrap(),
        )
        .unwrap();
        assert_eq!(infer_kind(&p), Kind::Pure);
    }

    #[test]
    fn hierarchy() {
        let s = sig();
        let i = Loc::new("i");
        assert!(has_kind(&Term::id(&s, ObjTy::Unit).unwrap(), Kind::Rw));
        assert!(!has_kind(&Term::update(&s, &i).unwrap(), Kind::Ro));
        assert!(has_kind(&Term::lookup(&s, &i).unwrap(), Kind::Ro));
        assert!(!has_kind(&Term::lookup(&s, &i).unwrap(), Kind::Pure));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in Kind::ALL {
            assert_eq!(k.as_str().parse::<Kind>().unwrap(), k);
        }
    }
}
