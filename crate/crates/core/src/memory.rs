//! Locations, their finite value carriers, and the stores built from them.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A memory location identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc(Arc<str>);

impl Loc {
    pub fn new(name: &str) -> Self {
        Loc(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Loc {
    fn from(s: &str) -> Self {
        Loc::new(s)
    }
}

impl From<String> for Loc {
    fn from(s: String) -> Self {
        Loc(Arc::from(s))
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An opaque carrier value. Values are only ever compared for equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(Arc<str>);

impl Value {
    pub fn new(token: &str) -> Self {
        Value(Arc::from(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::new(s)
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value(Arc::from(s))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("duplicate location `{0}`")]
    DuplicateLocation(Loc),
    #[error("location `{0}` has an empty carrier")]
    EmptyCarrier(Loc),
    #[error("location `{0}` has no carrier")]
    MissingCarrier(Loc),
    #[error("carrier given for undeclared location `{0}`")]
    UndeclaredLocation(Loc),
    #[error("value `{value}` appears twice in the carrier of `{loc}`")]
    DuplicateValue { loc: Loc, value: Value },
}

/// The ordered set of locations together with the finite carrier of each.
///
/// Immutable once built; iteration order over locations and carrier values is
/// the declaration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorySignature {
    locations: Vec<Loc>,
    carriers: Vec<Vec<Value>>,
}

impl MemorySignature {
    /// Builds a signature from an ordered location list and a carrier map.
    pub fn declare(
        locations: Vec<Loc>,
        mut carriers: HashMap<Loc, Vec<Value>>,
    ) -> Result<Self, SignatureError> {
        let mut seen = HashSet::new();
        for loc in &locations {
            if !seen.insert(loc.clone()) {
                return Err(SignatureError::DuplicateLocation(loc.clone()));
            }
        }
        if let Some(extra) = carriers.keys().filter(|l| !seen.contains(*l)).min() {
            return Err(SignatureError::UndeclaredLocation(extra.clone()));
        }
        let mut ordered = Vec::with_capacity(locations.len());
        for loc in &locations {
            let carrier = carriers
                .remove(loc)
                .ok_or_else(|| SignatureError::MissingCarrier(loc.clone()))?;
            ordered.push(carrier);
        }
        Self::from_parts(locations, ordered)
    }

    /// Builds a signature from `(location, carrier)` pairs in declaration order.
    pub fn from_pairs<L, V, I, C>(entries: I) -> Result<Self, SignatureError>
    where
        I: IntoIterator<Item = (L, C)>,
        C: IntoIterator<Item = V>,
        L: Into<Loc>,
        V: Into<Value>,
    {
        let (locations, carriers) = entries
            .into_iter()
            .map(|(l, c)| (l.into(), c.into_iter().map(Into::into).collect()))
            .unzip();
        Self::from_parts(locations, carriers)
    }

    fn from_parts(locations: Vec<Loc>, carriers: Vec<Vec<Value>>) -> Result<Self, SignatureError> {
        let mut seen = HashSet::new();
        for (loc, carrier) in locations.iter().zip(&carriers) {
            if !seen.insert(loc) {
                return Err(SignatureError::DuplicateLocation(loc.clone()));
            }
            if carrier.is_empty() {
                return Err(SignatureError::EmptyCarrier(loc.clone()));
            }
            let mut values = HashSet::new();
            for v in carrier {
                if !values.insert(v) {
                    return Err(SignatureError::DuplicateValue {
                        loc: loc.clone(),
                        value: v.clone(),
                    });
                }
            }
        }
        Ok(MemorySignature {
            locations,
            carriers,
        })
    }

    pub fn locations(&self) -> &[Loc] {
        &self.locations
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn index_of(&self, loc: &Loc) -> Option<usize> {
        self.locations.iter().position(|l| l == loc)
    }

    pub fn contains(&self, loc: &Loc) -> bool {
        self.index_of(loc).is_some()
    }

    /// The carrier of `loc`, if declared.
    pub fn carrier(&self, loc: &Loc) -> Option<&[Value]> {
        self.index_of(loc).map(|ix| self.carriers[ix].as_slice())
    }

    pub fn carrier_at(&self, index: usize) -> &[Value] {
        &self.carriers[index]
    }

    /// Number of distinct stores, saturating at `usize::MAX`.
    pub fn store_count(&self) -> usize {
        self.carriers
            .iter()
            .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))
            .unwrap_or(usize::MAX)
    }

    /// Every total store over this signature, each exactly once.
    ///
    /// The order is lexicographic over carrier positions with the last
    /// declared location varying fastest.
    pub fn stores(&self) -> Stores<'_> {
        Stores {
            sig: self,
            cursor: Some(vec![0; self.locations.len()]),
        }
    }
}

impl fmt::Display for MemorySignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("locations")?;
        for (loc, carrier) in self.locations.iter().zip(&self.carriers) {
            write!(f, " {loc}:{{")?;
            for (n, v) in carrier.iter().enumerate() {
                if n > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

/// Iterator over all stores of a signature.
pub struct Stores<'a> {
    sig: &'a MemorySignature,
    cursor: Option<Vec<usize>>,
}

impl Iterator for Stores<'_> {
    type Item = Store;

    fn next(&mut self) -> Option<Store> {
        let cursor = self.cursor.as_mut()?;
        let store = Store {
            values: cursor
                .iter()
                .enumerate()
                .map(|(loc, &v)| self.sig.carriers[loc][v].clone())
                .collect(),
        };
        // odometer step, last location fastest
        let mut pos = cursor.len();
        loop {
            if pos == 0 {
                self.cursor = None;
                break;
            }
            pos -= 1;
            cursor[pos] += 1;
            if cursor[pos] < self.sig.carriers[pos].len() {
                break;
            }
            cursor[pos] = 0;
        }
        Some(store)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("store has {found} entries but the signature declares {expected} locations")]
    Arity { expected: usize, found: usize },
    #[error("value `{value}` is not in the carrier of `{loc}`")]
    NotInCarrier { loc: Loc, value: Value },
    #[error("unknown location `{0}`")]
    UnknownLocation(Loc),
}

/// A total assignment of carrier values to the locations of a signature.
///
/// Entries are positional: entry `n` belongs to `sig.locations()[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Store {
    values: Vec<Value>,
}

impl Store {
    pub fn new(sig: &MemorySignature, values: Vec<Value>) -> Result<Self, StoreError> {
        if values.len() != sig.len() {
            return Err(StoreError::Arity {
                expected: sig.len(),
                found: values.len(),
            });
        }
        for (ix, v) in values.iter().enumerate() {
            if !sig.carriers[ix].contains(v) {
                return Err(StoreError::NotInCarrier {
                    loc: sig.locations[ix].clone(),
                    value: v.clone(),
                });
            }
        }
        Ok(Store { values })
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn get(&self, index: usize) -> &Value {
        &self.values[index]
    }

    pub fn lookup(&self, sig: &MemorySignature, loc: &Loc) -> Result<&Value, StoreError> {
        sig.index_of(loc)
            .map(|ix| &self.values[ix])
            .ok_or_else(|| StoreError::UnknownLocation(loc.clone()))
    }

    /// Copy with entry `index` replaced.
    pub fn with(&self, index: usize, value: Value) -> Store {
        let mut values = self.values.clone();
        values[index] = value;
        Store { values }
    }

    /// Renders as `{i:0, j:1}` using the signature's location names.
    pub fn show(&self, sig: &MemorySignature) -> String {
        let body: Vec<String> = sig
            .locations
            .iter()
            .zip(&self.values)
            .map(|(l, v)| format!("{l}:{v}"))
            .collect();
        format!("{{{}}}", body.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(entries: &[(&str, &[&str])]) -> Result<MemorySignature, SignatureError> {
        MemorySignature::from_pairs(entries.iter().map(|(l, c)| (*l, c.iter().copied())))
    }

    #[test]
    fn minimal_signature() {
        let s = sig(&[("i", &["0", "1"])]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.carrier(&Loc::new("i")).unwrap().len(), 2);
    }

    #[test]
    fn two_locations_have_four_stores() {
        let s = sig(&[("i", &["0", "1"]), ("j", &["0", "1"])]).unwrap();
        assert_eq!(s.store_count(), 4);
        assert_eq!(s.stores().count(), 4);
    }

    #[test]
    fn duplicate_location_rejected() {
        assert_eq!(
            sig(&[("i", &["0"]), ("i", &["1"])]),
            Err(SignatureError::DuplicateLocation(Loc::new("i")))
        );
        let mut carriers = HashMap::new();
        carriers.insert(Loc::new("i"), vec![Value::new("0")]);
        assert_eq!(
            MemorySignature::declare(vec![Loc::new("i"), Loc::new("i")], carriers),
            Err(SignatureError::DuplicateLocation(Loc::new("i")))
        );
    }

    #[test]
    fn empty_and_missing_carriers_rejected() {
        assert_eq!(
            sig(&[("i", &[])]),
            Err(SignatureError::EmptyCarrier(Loc::new("i")))
        );
        assert_eq!(
            MemorySignature::declare(vec![Loc::new("i")], HashMap::new()),
            Err(SignatureError::MissingCarrier(Loc::new("i")))
        );
        let mut carriers = HashMap::new();
        carriers.insert(Loc::new("i"), vec![Value::new("0")]);
        carriers.insert(Loc::new("k"), vec![Value::new("0")]);
        assert_eq!(
            MemorySignature::declare(vec![Loc::new("i")], carriers),
            Err(SignatureError::UndeclaredLocation(Loc::new("k")))
        );
    }

    #[test]
    fn duplicate_value_rejected() {
        assert!(matches!(
            sig(&[("i", &["0", "0"])]),
            Err(SignatureError::DuplicateValue { .. })
        ));
    }

    #[test]
    fn single_location_enumeration() {
        let s = sig(&[("i", &["0", "1"])]).unwrap();
        let shown: Vec<String> = s.stores().map(|st| st.show(&s)).collect();
        assert_eq!(shown, ["{i:0}", "{i:1}"]);
    }

    #[test]
    fn singleton_carrier() {
        let s = sig(&[("i", &["7"])]).unwrap();
        let shown: Vec<String> = s.stores().map(|st| st.show(&s)).collect();
        assert_eq!(shown, ["{i:7}"]);
    }

    #[test]
    fn enumeration_order_is_odometer() {
        let s = sig(&[("i", &["0", "1"]), ("j", &["a", "b", "c"])]).unwrap();
        let shown: Vec<String> = s.stores().map(|st| st.show(&s)).collect();
        assert_eq!(
            shown,
            [
                "{i:0, j:a}",
                "{i:0, j:b}",
                "{i:0, j:c}",
                "{i:1, j:a}",
                "{i:1, j:b}",
                "{i:1, j:c}"
            ]
        );
    }

    #[test]
    fn store_validation() {
        let s = sig(&[("i", &["0", "1"])]).unwrap();
        assert!(Store::new(&s, vec![Value::new("1")]).is_ok());
        assert!(matches!(
            Store::new(&s, vec![Value::new("2")]),
            Err(StoreError::NotInCarrier { .. })
        ));
        assert!(matches!(
            Store::new(&s, vec![]),
            Err(StoreError::Arity { .. })
        ));
    }

    #[test]
    fn display_matches_input_format() {
        let s = sig(&[("i", &["0", "1"]), ("j", &["0", "1"])]).unwrap();
        assert_eq!(s.to_string(), "locations i:{0,1} j:{0,1}");
    }
}
