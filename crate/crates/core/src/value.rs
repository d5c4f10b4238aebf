//! Output values and output domains.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// A value produced by a sequence function or a machine output map.
///
/// Equality is structural; integers and symbols never compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OutputValue {
    Int(i64),
    Symbol(Arc<str>),
    Tuple(Vec<OutputValue>),
}

impl OutputValue {
    pub fn symbol(s: impl AsRef<str>) -> Self {
        OutputValue::Symbol(Arc::from(s.as_ref()))
    }

    pub fn tuple(items: impl IntoIterator<Item = OutputValue>) -> Self {
        OutputValue::Tuple(items.into_iter().collect())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            OutputValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[OutputValue]> {
        match self {
            OutputValue::Tuple(items) => Some(items),
            _ => None,
        }
    }

    /// Views the value as a tuple: scalars act as their own 1-tuple.
    pub(crate) fn slots(&self) -> &[OutputValue] {
        match self {
            OutputValue::Tuple(items) => items,
            other => std::slice::from_ref(other),
        }
    }
}

impl From<i64> for OutputValue {
    fn from(v: i64) -> Self {
        OutputValue::Int(v)
    }
}

impl From<&str> for OutputValue {
    fn from(s: &str) -> Self {
        OutputValue::symbol(s)
    }
}

impl fmt::Display for OutputValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputValue::Int(v) => write!(f, "{v}"),
            OutputValue::Symbol(s) => write!(f, "{s}"),
            OutputValue::Tuple(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// The set of values a sequence function may produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputDomain {
    /// A finite list of values in canonical (declaration) order.
    Explicit(Vec<OutputValue>),
    /// The unbounded-integer marker; such functions cannot be compiled.
    UnboundedInt,
}

impl OutputDomain {
    pub fn is_unbounded(&self) -> bool {
        matches!(self, OutputDomain::UnboundedInt)
    }

    pub fn contains(&self, value: &OutputValue) -> bool {
        match self {
            OutputDomain::Explicit(values) => values.contains(value),
            OutputDomain::UnboundedInt => matches!(value, OutputValue::Int(_)),
        }
    }
}

/// Comparison operators used in guards, output-map rules, and predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn is_ordering(self) -> bool {
        matches!(self, CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge)
    }

    pub(crate) fn compare_ints(self, left: i64, right: i64) -> bool {
        match self {
            CmpOp::Eq => left == right,
            CmpOp::Ne => left != right,
            CmpOp::Lt => left < right,
            CmpOp::Le => left <= right,
            CmpOp::Gt => left > right,
            CmpOp::Ge => left >= right,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        };
        f.write_str(text)
    }
}

/// Compares two values. Equality is structural; ordering requires integers.
pub fn compare_values(op: CmpOp, left: &OutputValue, right: &OutputValue) -> Result<bool> {
    match op {
        CmpOp::Eq => Ok(left == right),
        CmpOp::Ne => Ok(left != right),
        _ => match (left.as_int(), right.as_int()) {
            (Some(l), Some(r)) => Ok(op.compare_ints(l, r)),
            (None, _) => Err(Error::OrderedComparisonOnNonInteger(left.clone())),
            (_, None) => Err(Error::OrderedComparisonOnNonInteger(right.clone())),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ints_and_symbols_never_compare_equal() {
        assert_ne!(OutputValue::Int(3), OutputValue::symbol("3"));
    }

    #[test]
    fn tuple_display() {
        let v = OutputValue::tuple([OutputValue::Int(3), OutputValue::Int(2)]);
        assert_eq!(v.to_string(), "(3, 2)");
    }

    #[test]
    fn ordering_rejects_symbols() {
        let err = compare_values(CmpOp::Lt, &OutputValue::symbol("a"), &OutputValue::Int(1));
        assert!(matches!(err, Err(Error::OrderedComparisonOnNonInteger(_))));
    }

    #[test]
    fn unbounded_domain_contains_any_int() {
        assert!(OutputDomain::UnboundedInt.contains(&OutputValue::Int(-7)));
        assert!(!OutputDomain::UnboundedInt.contains(&OutputValue::symbol("x")));
    }
}
