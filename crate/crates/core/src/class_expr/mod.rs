//! EL class expressions over a heterogeneous graph's type vocabulary.
//!
//! Node types act as named classes and edge types as properties. Candidates
//! produced by this crate are always in normalized form: every intersection
//! has exactly one named-class operand plus one or more existential
//! restrictions, and intersections never nest directly.

mod fulfill;
mod mutate;
mod parse;

use std::fmt;

use crate::error::{Error, Result};

pub use fulfill::{extension, fulfills, CompiledExpression};
pub use mutate::{apply_mutation, mutate_ce, random_ce, MutationSite, Vocabulary};
pub use parse::parse;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassExpression {
    /// A node type name.
    Class(String),
    Intersection(Vec<ClassExpression>),
    Existential {
        property: String,
        filler: Box<ClassExpression>,
    },
}

impl ClassExpression {
    pub fn class(name: impl Into<String>) -> Self {
        ClassExpression::Class(name.into())
    }

    pub fn exists(property: impl Into<String>, filler: ClassExpression) -> Self {
        ClassExpression::Existential {
            property: property.into(),
            filler: Box::new(filler),
        }
    }

    /// Builds `class ⊓ ∃p₁.F₁ ⊓ …`, or the bare class when `restrictions` is
    /// empty.
    pub fn with_restrictions<I, P>(class: impl Into<String>, restrictions: I) -> Self
    where
        I: IntoIterator<Item = (P, ClassExpression)>,
        P: Into<String>,
    {
        let mut ops = vec![ClassExpression::class(class)];
        ops.extend(
            restrictions
                .into_iter()
                .map(|(p, f)| ClassExpression::exists(p, f)),
        );
        if ops.len() == 1 {
            ops.pop().unwrap()
        } else {
            ClassExpression::Intersection(ops)
        }
    }

    /// Number of named-class occurrences.
    pub fn length(&self) -> usize {
        match self {
            ClassExpression::Class(_) => 1,
            ClassExpression::Intersection(ops) => ops.iter().map(Self::length).sum(),
            ClassExpression::Existential { filler, .. } => filler.length(),
        }
    }

    pub fn existential_count(&self) -> usize {
        match self {
            ClassExpression::Class(_) => 0,
            ClassExpression::Intersection(ops) => ops.iter().map(Self::existential_count).sum(),
            ClassExpression::Existential { filler, .. } => 1 + filler.existential_count(),
        }
    }

    pub fn intersection_count(&self) -> usize {
        match self {
            ClassExpression::Class(_) => 0,
            ClassExpression::Intersection(ops) => {
                1 + ops.iter().map(Self::intersection_count).sum::<usize>()
            }
            ClassExpression::Existential { filler, .. } => filler.intersection_count(),
        }
    }

    /// Depth in existential steps: `A` is 0, `A ⊓ ∃r.B` is 1.
    pub fn depth(&self) -> usize {
        match self {
            ClassExpression::Class(_) => 0,
            ClassExpression::Intersection(ops) => ops.iter().map(Self::depth).max().unwrap_or(0),
            ClassExpression::Existential { filler, .. } => 1 + filler.depth(),
        }
    }

    /// The named class at the top level: the expression itself when bare, the
    /// single class operand of a root intersection otherwise.
    pub fn root_class(&self) -> Result<&str> {
        match self {
            ClassExpression::Class(name) => Ok(name),
            ClassExpression::Intersection(ops) => {
                let mut classes = ops.iter().filter_map(|op| match op {
                    ClassExpression::Class(name) => Some(name.as_str()),
                    _ => None,
                });
                match (classes.next(), classes.next()) {
                    (Some(name), None) => Ok(name),
                    (None, _) => Err(Error::NotNormalized(format!(
                        "intersection without a named class: {self}"
                    ))),
                    (Some(_), Some(_)) => Err(Error::NotNormalized(format!(
                        "intersection with several named classes: {self}"
                    ))),
                }
            }
            ClassExpression::Existential { .. } => Err(Error::NotNormalized(format!(
                "existential restriction has no root class: {self}"
            ))),
        }
    }

    /// Checks the normalized-form invariants on the whole tree.
    pub fn validate(&self) -> Result<()> {
        match self {
            ClassExpression::Class(_) => Ok(()),
            ClassExpression::Intersection(ops) => {
                self.root_class()?;
                if ops.len() < 2 {
                    return Err(Error::NotNormalized(format!(
                        "intersection needs at least one restriction: {self}"
                    )));
                }
                for op in ops {
                    match op {
                        ClassExpression::Class(_) => {}
                        ClassExpression::Intersection(_) => {
                            return Err(Error::NotNormalized(format!(
                                "nested intersection: {self}"
                            )))
                        }
                        ClassExpression::Existential { filler, .. } => filler.validate()?,
                    }
                }
                Ok(())
            }
            ClassExpression::Existential { .. } => self.root_class().map(|_| ()),
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.validate().is_ok()
    }

    /// The existential operands of a normalized node, as `(property, filler)`.
    pub fn restrictions(&self) -> Vec<(&str, &ClassExpression)> {
        match self {
            ClassExpression::Intersection(ops) => ops
                .iter()
                .filter_map(|op| match op {
                    ClassExpression::Existential { property, filler } => {
                        Some((property.as_str(), filler.as_ref()))
                    }
                    _ => None,
                })
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Copy with intersection operands sorted recursively; two expressions
    /// that differ only in operand order have equal canonical forms.
    pub fn canonical(&self) -> ClassExpression {
        match self {
            ClassExpression::Class(_) => self.clone(),
            ClassExpression::Intersection(ops) => {
                let mut ops: Vec<_> = ops.iter().map(Self::canonical).collect();
                ops.sort();
                ClassExpression::Intersection(ops)
            }
            ClassExpression::Existential { property, filler } => {
                ClassExpression::exists(property.clone(), filler.canonical())
            }
        }
    }

    pub fn equivalent(&self, other: &ClassExpression) -> bool {
        self.canonical() == other.canonical()
    }

    /// Named classes occurring anywhere in the expression.
    pub fn class_names(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_classes(&mut out);
        out
    }

    fn collect_classes<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ClassExpression::Class(name) => out.push(name),
            ClassExpression::Intersection(ops) => ops.iter().for_each(|op| op.collect_classes(out)),
            ClassExpression::Existential { filler, .. } => filler.collect_classes(out),
        }
    }
}

impl fmt::Display for ClassExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassExpression::Class(name) => f.write_str(name),
            ClassExpression::Intersection(ops) => {
                for (i, op) in ops.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" and ")?;
                    }
                    match op {
                        ClassExpression::Class(_) => write!(f, "{op}")?,
                        _ => write!(f, "({op})")?,
                    }
                }
                Ok(())
            }
            ClassExpression::Existential { property, filler } => match filler.as_ref() {
                ClassExpression::Intersection(_) => write!(f, "{property} some ({filler})"),
                _ => write!(f, "{property} some {filler}"),
            },
        }
    }
}

impl std::str::FromStr for ClassExpression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: &str) -> ClassExpression {
        ClassExpression::class(n)
    }

    #[test]
    fn length_counts_classes() {
        assert_eq!(c("B").length(), 1);
        let b_to_a = ClassExpression::with_restrictions("B", [("to", c("A"))]);
        assert_eq!(b_to_a.length(), 2);
        let nested = ClassExpression::with_restrictions(
            "B",
            [("to", ClassExpression::with_restrictions("A", [("to", c("C"))]))],
        );
        assert_eq!(nested.length(), 3);
        assert_eq!(nested.depth(), 2);
    }

    #[test]
    fn render() {
        let b_to_a = ClassExpression::with_restrictions("B", [("to", c("A"))]);
        assert_eq!(b_to_a.to_string(), "B and (to some A)");
        let nested = ClassExpression::with_restrictions(
            "B",
            [("to", ClassExpression::with_restrictions("A", [("to", c("C"))]))],
        );
        assert_eq!(nested.to_string(), "B and (to some (A and (to some C)))");
    }

    #[test]
    fn root_class() {
        let ce = ClassExpression::with_restrictions("A", [("r", c("B"))]);
        assert_eq!(ce.root_class().unwrap(), "A");
        assert_eq!(c("C").root_class().unwrap(), "C");
        assert!(ClassExpression::exists("r", c("B")).root_class().is_err());
        let two = ClassExpression::Intersection(vec![c("A"), c("B")]);
        assert!(two.root_class().is_err());
    }

    #[test]
    fn validate_rejects_nesting() {
        let inner = ClassExpression::with_restrictions("A", [("r", c("B"))]);
        let nested = ClassExpression::Intersection(vec![c("A"), inner]);
        assert!(!nested.is_normalized());
        let lonely = ClassExpression::Intersection(vec![c("A")]);
        assert!(!lonely.is_normalized());
        let bad_filler = ClassExpression::with_restrictions(
            "A",
            [("r", ClassExpression::exists("r", c("B")))],
        );
        assert!(!bad_filler.is_normalized());
    }

    #[test]
    fn equivalence_ignores_operand_order() {
        let x = ClassExpression::with_restrictions("A", [("r", c("B")), ("r", c("C"))]);
        let y = ClassExpression::with_restrictions("A", [("r", c("C")), ("r", c("B"))]);
        assert_ne!(x, y);
        assert!(x.equivalent(&y));
    }
}
