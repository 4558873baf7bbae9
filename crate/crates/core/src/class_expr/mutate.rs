//! Random creation and mutation of candidate expressions.

use rand::seq::SliceRandom;
use rand::Rng;

use super::ClassExpression;
use crate::error::{Error, Result};

/// Classes and properties a search may draw from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    pub classes: Vec<String>,
    pub properties: Vec<String>,
}

impl Vocabulary {
    pub fn new<C, P, S, T>(classes: C, properties: P) -> Result<Self>
    where
        C: IntoIterator<Item = S>,
        P: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        let vocab = Self {
            classes: classes.into_iter().map(Into::into).collect(),
            properties: properties.into_iter().map(Into::into).collect(),
        };
        if vocab.classes.is_empty() {
            return Err(Error::InvalidArgument("class list is empty".into()));
        }
        if vocab.properties.is_empty() {
            return Err(Error::InvalidArgument("property list is empty".into()));
        }
        Ok(vocab)
    }

    fn draw_restriction<R: Rng + ?Sized>(&self, rng: &mut R) -> ClassExpression {
        let class = self.classes.choose(rng).expect("non-empty by construction");
        let property = self.properties.choose(rng).expect("non-empty by construction");
        ClassExpression::exists(property.clone(), ClassExpression::class(class.clone()))
    }
}

/// `class_to_explain ⊓ ∃r.X` with `X` uniform over the vocabulary's classes.
pub fn random_ce<R: Rng + ?Sized>(
    vocab: &Vocabulary,
    class_to_explain: &str,
    rng: &mut R,
) -> ClassExpression {
    let restriction = vocab.draw_restriction(rng);
    ClassExpression::Intersection(vec![ClassExpression::class(class_to_explain), restriction])
}

/// Where a mutation attaches its new restriction. Indices count nodes of the
/// given kind in pre-order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationSite {
    Intersection(usize),
    Class(usize),
}

/// Adds one `∃r.X` to a copy of `ce`: half of the time as an extra operand
/// of a uniformly chosen intersection, otherwise by turning a uniformly
/// chosen class occurrence `K` into `K ⊓ ∃r.X`. Expressions without an
/// intersection always take the class branch.
pub fn mutate_ce<R: Rng + ?Sized>(
    ce: &ClassExpression,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<ClassExpression> {
    let addition = vocab.draw_restriction(rng);
    let intersections = ce.intersection_count();
    let classes = ce.length();
    let pick_intersection = rng.gen_bool(0.5);
    let site = if pick_intersection && intersections > 0 {
        MutationSite::Intersection(rng.gen_range(0..intersections))
    } else {
        MutationSite::Class(rng.gen_range(0..classes))
    };
    apply_mutation(ce, site, addition)
}

pub fn apply_mutation(
    ce: &ClassExpression,
    site: MutationSite,
    addition: ClassExpression,
) -> Result<ClassExpression> {
    let mut counter = match site {
        MutationSite::Intersection(i) | MutationSite::Class(i) => i,
    };
    let on_intersection = matches!(site, MutationSite::Intersection(_));
    let mut addition = Some(addition);
    let out = rebuild(ce, on_intersection, &mut counter, &mut addition);
    if addition.is_some() {
        return Err(Error::InvalidArgument(format!(
            "mutation site {site:?} does not exist in {ce}"
        )));
    }
    Ok(out)
}

fn rebuild(
    ce: &ClassExpression,
    on_intersection: bool,
    counter: &mut usize,
    addition: &mut Option<ClassExpression>,
) -> ClassExpression {
    match ce {
        ClassExpression::Class(name) => {
            if !on_intersection && addition.is_some() && hit(counter) {
                let add = addition.take().unwrap();
                ClassExpression::Intersection(vec![ClassExpression::class(name.clone()), add])
            } else {
                ce.clone()
            }
        }
        ClassExpression::Intersection(ops) => {
            let mut extend_here = on_intersection && addition.is_some() && hit(counter);
            let mut new_ops = Vec::with_capacity(ops.len() + 1);
            for op in ops {
                match op {
                    // a class operand sits inside this intersection, so
                    // `K ⊓ ∃r.X` flattens into an extra operand here
                    ClassExpression::Class(_) => {
                        if !on_intersection && addition.is_some() && hit(counter) {
                            extend_here = true;
                        }
                        new_ops.push(op.clone());
                    }
                    _ => new_ops.push(rebuild(op, on_intersection, counter, addition)),
                }
            }
            if extend_here {
                new_ops.push(addition.take().expect("claimed above"));
            }
            ClassExpression::Intersection(new_ops)
        }
        ClassExpression::Existential { property, filler } => ClassExpression::exists(
            property.clone(),
            rebuild(filler, on_intersection, counter, addition),
        ),
    }
}

fn hit(counter: &mut usize) -> bool {
    if *counter == 0 {
        // push past zero so later nodes never match again
        *counter = usize::MAX;
        true
    } else {
        if *counter != usize::MAX {
            *counter -= 1;
        }
        false
    }
}
