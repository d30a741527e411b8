//! Property values and property sets.
//!
//! Values carry a canonical total order (type tag first, then payload) so
//! that relations sort deterministically, `set` aggregation can pick stable
//! representatives, and floats can live in ordered containers. Floats are
//! wrapped in [`ordered_float::OrderedFloat`], which treats NaN as equal to
//! itself and greater than every number.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ordered_float::OrderedFloat;

/// A single attribute value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyValue {
    Bool(bool),
    Int(i64),
    Float(OrderedFloat<f64>),
    Text(String),
    List(Vec<PropertyValue>),
    Set(BTreeSet<PropertyValue>),
    Map(BTreeMap<String, PropertyValue>),
}

impl PropertyValue {
    pub fn float(v: f64) -> Self {
        PropertyValue::Float(OrderedFloat(v))
    }

    pub fn text(v: impl Into<String>) -> Self {
        PropertyValue::Text(v.into())
    }

    pub fn set<I: IntoIterator<Item = PropertyValue>>(vals: I) -> Self {
        PropertyValue::Set(vals.into_iter().collect())
    }

    pub fn list<I: IntoIterator<Item = PropertyValue>>(vals: I) -> Self {
        PropertyValue::List(vals.into_iter().collect())
    }

    /// Numeric payload when the value is Int or Float.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            PropertyValue::Int(i) => Some(*i as f64),
            PropertyValue::Float(f) => Some(f.0),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            PropertyValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, PropertyValue::Int(_) | PropertyValue::Float(_))
    }

    /// Name of the value's type, for error messages.
    pub fn type_name(&self) -> &'static str {
        match self {
            PropertyValue::Bool(_) => "bool",
            PropertyValue::Int(_) => "int",
            PropertyValue::Float(_) => "float",
            PropertyValue::Text(_) => "text",
            PropertyValue::List(_) => "list",
            PropertyValue::Set(_) => "set",
            PropertyValue::Map(_) => "map",
        }
    }

    /// Elements of a collection value, or the value itself as a singleton.
    pub fn elements(&self) -> Vec<&PropertyValue> {
        match self {
            PropertyValue::List(v) => v.iter().collect(),
            PropertyValue::Set(s) => s.iter().collect(),
            _ => vec![self],
        }
    }
}

impl From<i64> for PropertyValue {
    fn from(v: i64) -> Self {
        PropertyValue::Int(v)
    }
}

impl From<f64> for PropertyValue {
    fn from(v: f64) -> Self {
        PropertyValue::float(v)
    }
}

impl From<bool> for PropertyValue {
    fn from(v: bool) -> Self {
        PropertyValue::Bool(v)
    }
}

impl From<&str> for PropertyValue {
    fn from(v: &str) -> Self {
        PropertyValue::text(v)
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Bool(b) => write!(f, "{b}"),
            PropertyValue::Int(i) => write!(f, "{i}"),
            PropertyValue::Float(x) => {
                // Keep a trailing marker so integral floats stay floats on re-read.
                if x.0.fract() == 0.0 && x.0.is_finite() {
                    write!(f, "{:.1}", x.0)
                } else {
                    write!(f, "{}", x.0)
                }
            }
            PropertyValue::Text(s) => write!(f, "{s:?}"),
            PropertyValue::List(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            PropertyValue::Set(s) => {
                write!(f, "{{")?;
                for (i, x) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "}}")
            }
            PropertyValue::Map(m) => {
                write!(f, "{{")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k:?}: {v}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// An attribute record: property names mapped to values.
///
/// Kept sorted by name so property sets themselves order canonically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PropertySet(BTreeMap<String, PropertyValue>);

impl PropertySet {
    pub fn new() -> Self {
        PropertySet(BTreeMap::new())
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, PropertyValue)>,
        S: Into<String>,
    {
        PropertySet(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn get(&self, name: &str) -> Option<&PropertyValue> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: PropertyValue) {
        self.0.insert(name.into(), value);
    }

    pub fn remove(&mut self, name: &str) -> Option<PropertyValue> {
        self.0.remove(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &PropertyValue)> {
        self.0.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }
}

impl FromIterator<(String, PropertyValue)> for PropertySet {
    fn from_iter<I: IntoIterator<Item = (String, PropertyValue)>>(iter: I) -> Self {
        PropertySet(iter.into_iter().collect())
    }
}

impl fmt::Display for PropertySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "}}")
    }
}

/// Convenience macro for building property sets in tests and fixtures.
#[macro_export]
macro_rules! props {
    () => { $crate::value::PropertySet::new() };
    ($($name:expr => $value:expr),+ $(,)?) => {{
        let mut ps = $crate::value::PropertySet::new();
        $(ps.insert($name, $crate::value::PropertyValue::from($value));)+
        ps
    }};
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_ranks_type_tag_before_payload() {
        let mut vals = vec![
            PropertyValue::text("abc"),
            PropertyValue::Int(5),
            PropertyValue::Bool(true),
            PropertyValue::float(2.5),
            PropertyValue::Int(-1),
        ];
        vals.sort();
        assert_eq!(
            vals,
            vec![
                PropertyValue::Bool(true),
                PropertyValue::Int(-1),
                PropertyValue::Int(5),
                PropertyValue::float(2.5),
                PropertyValue::text("abc"),
            ]
        );
    }

    #[test]
    fn nan_is_orderable_and_equal_to_itself() {
        let nan = PropertyValue::float(f64::NAN);
        assert_eq!(nan, nan.clone());
        assert!(PropertyValue::float(1e300) < nan);
    }

    #[test]
    fn property_sets_compare_by_sorted_entries() {
        let a = props! {"name" => "Ann", "sal" => 100i64};
        let b = props! {"sal" => 100i64, "name" => "Ann"};
        assert_eq!(a, b);
        assert_eq!(a.get("sal"), Some(&PropertyValue::Int(100)));
        assert!(a < props! {"name" => "Bob"});
    }
}
