//! Aggregation across dimensions: archetype dispatch, relational and
//! functional aggregation, and folds over dimension hierarchies.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulation::{Alternative, Attribute, Hooks, Origin, Scale};
use crate::primitives::PrimitiveBase;
use crate::relation::{check_properties, decompose, levels_partition, ElementId, Relation};

const EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequiredProperty {
    Anonymity,
    Unanimity,
    NonManipulability,
    Explicability,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    WeightedFunctional,
    MajorityRelational,
    Lexicographic,
    VetoMajority,
}

/// Answers to the questions that decide how dimensions may be combined.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregationProfile {
    /// Whether preference differences can be measured, per attribute.
    pub differences_measurable: BTreeMap<String, bool>,
    pub commensurable: bool,
    pub preferentially_independent: bool,
    pub negative_preferences: bool,
    #[serde(default)]
    pub required_properties: BTreeSet<RequiredProperty>,
    /// Forces one archetype; dispatch fails if the profile does not admit it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_archetype: Option<Archetype>,
}

impl AggregationProfile {
    pub fn validate(&self) -> Result<()> {
        if self.commensurable {
            if let Some((a, _)) = self.differences_measurable.iter().find(|(_, m)| !**m) {
                return Err(Error::InvalidArgument(format!(
                    "commensurable profile but differences on `{a}` are not measurable"
                )));
            }
        }
        Ok(())
    }

    fn requires(&self, p: RequiredProperty) -> bool {
        self.required_properties.contains(&p)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "archetype", rename_all = "snake_case")]
pub enum Aggregator {
    WeightedFunctional { weights: BTreeMap<String, f64> },
    MajorityRelational { threshold: f64 },
    /// Dimensions from most to least important.
    Lexicographic { importance: Vec<String> },
    VetoMajority { threshold: f64, vetoes: BTreeSet<(ElementId, ElementId)> },
}

impl Aggregator {
    pub fn archetype(&self) -> Archetype {
        match self {
            Aggregator::WeightedFunctional { .. } => Archetype::WeightedFunctional,
            Aggregator::MajorityRelational { .. } => Archetype::MajorityRelational,
            Aggregator::Lexicographic { .. } => Archetype::Lexicographic,
            Aggregator::VetoMajority { .. } => Archetype::VetoMajority,
        }
    }

    /// Combines named dimension relations into one relation.
    pub fn apply(&self, inputs: &[(String, Relation)]) -> Result<Relation> {
        if inputs.is_empty() {
            return Err(Error::InvalidArgument("nothing to aggregate".into()));
        }
        let relations: Vec<Relation> = inputs.iter().map(|(_, r)| r.clone()).collect();
        match self {
            Aggregator::MajorityRelational { threshold } => {
                aggregate_majority(&relations, *threshold, &BTreeSet::new())
            }
            Aggregator::VetoMajority { threshold, vetoes } => aggregate_majority(&relations, *threshold, vetoes),
            Aggregator::Lexicographic { importance } => {
                let mut ordered = Vec::with_capacity(inputs.len());
                for name in importance {
                    if let Some((_, r)) = inputs.iter().find(|(n, _)| n == name) {
                        ordered.push(r.clone());
                    }
                }
                if ordered.len() != inputs.len() {
                    let missing: Vec<&str> = inputs
                        .iter()
                        .filter(|(n, _)| !importance.contains(n))
                        .map(|(n, _)| n.as_str())
                        .collect();
                    return Err(Error::NotTotalImportance(format!(
                        "no importance rank for {}",
                        missing.join(", ")
                    )));
                }
                aggregate_lexicographic(&ordered)
            }
            Aggregator::WeightedFunctional { weights } => {
                let mut functions = Vec::new();
                let mut w = Vec::new();
                for (name, r) in inputs {
                    let wj = weights
                        .get(name)
                        .ok_or_else(|| Error::InvalidArgument(format!("no weight for `{name}`")))?;
                    functions.push(function_from_relation(r)?);
                    w.push(*wj);
                }
                Ok(relation_from_function(&aggregate_weighted(&functions, &w, true)?))
            }
        }
    }
}

/// A dispatch decision with the reasons behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispatchRecord {
    pub aggregator: Aggregator,
    pub rationale: Vec<String>,
}

/// The dispatch table. Rows are tried top to bottom:
///
/// | condition                                   | archetype            |
/// |---------------------------------------------|----------------------|
/// | explicit negatives present                  | veto majority        |
/// | commensurable and independent               | weighted functional  |
/// | total importance order, anonymity not asked | lexicographic        |
/// | otherwise                                   | majority relational  |
///
/// With anonymity required, weights are equal and the majority threshold is
/// the strict majority of the dimension count.
pub fn dispatch(profile: &AggregationProfile, base: &PrimitiveBase) -> Result<DispatchRecord> {
    profile.validate()?;
    let dims: Vec<String> = base.per_dimension.keys().cloned().collect();
    if dims.is_empty() {
        return Err(Error::NoAdmissibleArchetype("no dimensions to aggregate".into()));
    }
    let m = dims.len();
    let anonymous = profile.requires(RequiredProperty::Anonymity);
    let threshold = if anonymous { (m / 2 + 1) as f64 / m as f64 } else { 0.5 };
    let importance = base.total_importance_order();
    let vetoes: BTreeSet<(ElementId, ElementId)> =
        base.negative_assertions.values().flatten().cloned().collect();
    let equal = 1.0 / m as f64;
    let weights: BTreeMap<String, f64> = dims.iter().map(|d| (d.clone(), equal)).collect();
    let mut rationale = Vec::new();

    let weighted_ok = profile.commensurable && profile.preferentially_independent;
    let lexicographic_ok = importance.is_some() && !anonymous;
    let veto_ok = profile.negative_preferences;

    let choice = match profile.required_archetype {
        Some(Archetype::WeightedFunctional) if !weighted_ok => {
            return Err(Error::NoAdmissibleArchetype(
                "weighted aggregation requires commensurable, independent dimensions".into(),
            ))
        }
        Some(Archetype::Lexicographic) if importance.is_none() => {
            return Err(Error::NoAdmissibleArchetype(
                "lexicographic aggregation requires a total importance order".into(),
            ))
        }
        Some(Archetype::Lexicographic) if anonymous => {
            return Err(Error::NoAdmissibleArchetype(
                "lexicographic aggregation cannot treat dimensions anonymously".into(),
            ))
        }
        Some(Archetype::VetoMajority) if !veto_ok => {
            return Err(Error::NoAdmissibleArchetype(
                "veto majority requires explicit negative preferences".into(),
            ))
        }
        Some(a) => {
            rationale.push(format!("archetype {a:?} required by the profile"));
            a
        }
        None if veto_ok => {
            rationale.push("explicit negative preferences act as vetoes".into());
            Archetype::VetoMajority
        }
        None if weighted_ok => {
            rationale.push("dimensions are commensurable and preferentially independent".into());
            Archetype::WeightedFunctional
        }
        None if lexicographic_ok => {
            rationale.push("derived importance is a total order".into());
            Archetype::Lexicographic
        }
        None => {
            rationale.push("only ordinal comparisons are available across dimensions".into());
            Archetype::MajorityRelational
        }
    };
    if anonymous {
        rationale.push(format!("anonymity: equal weights, threshold {threshold}"));
    }
    let aggregator = match choice {
        Archetype::WeightedFunctional => Aggregator::WeightedFunctional { weights },
        Archetype::MajorityRelational => Aggregator::MajorityRelational { threshold },
        Archetype::Lexicographic => Aggregator::Lexicographic {
            importance: importance.expect("checked above"),
        },
        Archetype::VetoMajority => Aggregator::VetoMajority { threshold, vetoes },
    };
    Ok(DispatchRecord { aggregator, rationale })
}

pub fn select_archetype(profile: &AggregationProfile, base: &PrimitiveBase) -> Result<Aggregator> {
    dispatch(profile, base).map(|d| d.aggregator)
}

fn check_common_carrier(relations: &[Relation]) -> Result<()> {
    let first = &relations[0];
    for (j, r) in relations.iter().enumerate().skip(1) {
        if !first.same_carrier_set(r) {
            return Err(Error::CarrierMismatch(format!("relation {j} has a different carrier")));
        }
    }
    Ok(())
}

/// Relation induced on `alts` by an attribute with an evaluator: the order
/// of ordinal scores, or plain equality of values on a nominal scale.
pub fn attribute_relation(attr: &Attribute, alts: &[Alternative], hooks: &Hooks) -> Result<Relation> {
    let ids: Vec<ElementId> = alts.iter().map(Alternative::id).collect();
    let values = alts.iter().map(|a| attr.evaluate(a, hooks)).collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    if attr.scale == Scale::Nominal {
        for (i, x) in ids.iter().enumerate() {
            for (j, y) in ids.iter().enumerate() {
                if values[i] == values[j] {
                    pairs.push((x.clone(), y.clone()));
                }
            }
        }
    } else {
        let scores = values.iter().map(|v| attr.ordinal_score(v)).collect::<Result<Vec<_>>>()?;
        for (i, x) in ids.iter().enumerate() {
            for (j, y) in ids.iter().enumerate() {
                if scores[i] >= scores[j] {
                    pairs.push((x.clone(), y.clone()));
                }
            }
        }
    }
    Relation::new(ids, pairs)
}

/// Keeps `(x, y)` when at least `threshold` of the relations contain it and
/// no veto forbids it. The result may be intransitive.
pub fn aggregate_majority(
    relations: &[Relation],
    threshold: f64,
    vetoes: &BTreeSet<(ElementId, ElementId)>,
) -> Result<Relation> {
    if relations.is_empty() {
        return Err(Error::InvalidArgument("nothing to aggregate".into()));
    }
    if !(0.5..=1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!("threshold {threshold} outside [0.5, 1]")));
    }
    check_common_carrier(relations)?;
    let carrier = relations[0].carrier().to_vec();
    let m = relations.len() as f64;
    let mut pairs = Vec::new();
    for x in &carrier {
        for y in &carrier {
            if vetoes.contains(&(x.clone(), y.clone())) {
                continue;
            }
            let votes = relations.iter().filter(|r| r.contains(x, y)).count() as f64;
            if votes / m >= threshold - EPS {
                pairs.push((x.clone(), y.clone()));
            }
        }
    }
    Relation::new(carrier, pairs)
}

/// Numbers attached to the elements of a carrier; larger is better.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreFunction {
    pub carrier: Vec<ElementId>,
    pub values: Vec<f64>,
}

impl ScoreFunction {
    pub fn new(carrier: Vec<ElementId>, values: Vec<f64>) -> Result<Self> {
        if carrier.len() != values.len() {
            return Err(Error::InvalidArgument("carrier and values differ in length".into()));
        }
        Ok(ScoreFunction { carrier, values })
    }

    pub fn get(&self, e: &ElementId) -> Option<f64> {
        self.carrier.iter().position(|c| c == e).map(|i| self.values[i])
    }
}

/// `f(x) = Σ_j w_j f_j(x)` over commensurable dimensions.
pub fn aggregate_weighted(
    functions: &[ScoreFunction],
    weights: &[f64],
    commensurable: bool,
) -> Result<ScoreFunction> {
    if !commensurable {
        return Err(Error::NotCommensurable);
    }
    if functions.is_empty() || functions.len() != weights.len() {
        return Err(Error::InvalidArgument("one weight per function is required".into()));
    }
    if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
        return Err(Error::InvalidArgument("weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
    }
    let carrier = functions[0].carrier.clone();
    let mut values = vec![0.0; carrier.len()];
    for (f, w) in functions.iter().zip(weights) {
        for (i, e) in carrier.iter().enumerate() {
            let v = f.get(e).ok_or_else(|| {
                Error::CarrierMismatch(format!("`{e}` missing from a dimension function"))
            })?;
            values[i] += w * v;
        }
        if f.carrier.len() != carrier.len() {
            return Err(Error::CarrierMismatch("dimension functions differ in carrier".into()));
        }
    }
    ScoreFunction::new(carrier, values)
}

/// Decides on the first dimension where the two elements are not
/// indifferent. Incomparability there leaves the pair incomparable.
pub fn aggregate_lexicographic(relations: &[Relation]) -> Result<Relation> {
    if relations.is_empty() {
        return Err(Error::InvalidArgument("nothing to aggregate".into()));
    }
    check_common_carrier(relations)?;
    let carrier = relations[0].carrier().to_vec();
    let mut pairs = Vec::new();
    for x in &carrier {
        for y in &carrier {
            let mut verdict = Some(true);
            for r in relations {
                match (r.contains(x, y), r.contains(y, x)) {
                    (true, true) => continue,
                    (true, false) => verdict = Some(true),
                    (false, true) => verdict = Some(false),
                    (false, false) => verdict = None,
                }
                break;
            }
            if verdict == Some(true) {
                pairs.push((x.clone(), y.clone()));
            }
        }
    }
    Relation::new(carrier, pairs)
}

/// Lexicographic aggregation of named dimensions in the order given by a
/// second-order importance relation, which must be a strict total order.
pub fn lexicographic_by_importance(
    dimensions: &BTreeMap<String, Relation>,
    importance: &Relation,
) -> Result<Relation> {
    let strict = decompose(importance)?.strict;
    let names: Vec<&ElementId> = importance.carrier().iter().collect();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            if !strict.contains(a, b) && !strict.contains(b, a) {
                return Err(Error::NotTotalImportance(format!("`{a}` and `{b}` are not ranked")));
            }
        }
    }
    let mut order: Vec<&ElementId> = names.clone();
    order.sort_by_key(|a| std::cmp::Reverse(names.iter().filter(|b| strict.contains(a, b)).count()));
    let mut relations = Vec::new();
    for a in order {
        let r = dimensions
            .get(a.as_str())
            .ok_or_else(|| Error::UnknownReference(format!("dimension `{a}`")))?;
        relations.push(r.clone());
    }
    if relations.len() != dimensions.len() {
        return Err(Error::NotTotalImportance("some dimensions are missing from the importance order".into()));
    }
    aggregate_lexicographic(&relations)
}

/// `x ⪰ y` iff `f(x) >= f(y)`.
pub fn relation_from_function(f: &ScoreFunction) -> Relation {
    let mut pairs = Vec::new();
    for (i, x) in f.carrier.iter().enumerate() {
        for (j, y) in f.carrier.iter().enumerate() {
            if f.values[i] >= f.values[j] {
                pairs.push((x.clone(), y.clone()));
            }
        }
    }
    Relation::new(f.carrier.clone(), pairs).expect("carrier comes from a valid function")
}

/// Level index of each element: the bottom class scores 0 and each class
/// above scores one more.
pub fn function_from_relation(r: &Relation) -> Result<ScoreFunction> {
    let props = check_properties(r)?;
    if !props.total_preorder {
        return Err(Error::NotRepresentable("relation is not a total preorder".into()));
    }
    let levels = levels_partition(r)?;
    let top = levels.len().saturating_sub(1);
    let values = r
        .carrier()
        .iter()
        .map(|e| (top - levels.class_of(e).expect("levels cover the carrier")) as f64)
        .collect();
    ScoreFunction::new(r.carrier().to_vec(), values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub name: String,
    #[serde(default)]
    pub tag: Origin,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<String>,
    /// Leaves carry a primitive relation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<Relation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregator: Option<Aggregator>,
}

impl TreeNode {
    pub fn leaf(name: &str, tag: Origin, relation: Relation) -> Self {
        TreeNode { name: name.into(), tag, children: Vec::new(), relation: Some(relation), aggregator: None }
    }

    pub fn internal(name: &str, children: &[&str], aggregator: Option<Aggregator>) -> Self {
        TreeNode {
            name: name.into(),
            tag: Origin::Value,
            children: children.iter().map(|c| c.to_string()).collect(),
            relation: None,
            aggregator,
        }
    }
}

/// A hierarchy of dimensions. Nodes in one joint group are folded in a
/// single step by the group's topmost node, over all inputs below the group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionTree {
    pub root: String,
    pub nodes: Vec<TreeNode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub joint_groups: Vec<Vec<String>>,
}

impl DimensionTree {
    fn node(&self, name: &str) -> Result<&TreeNode> {
        self.nodes
            .iter()
            .find(|n| n.name == name)
            .ok_or_else(|| Error::UnknownReference(format!("tree node `{name}`")))
    }

    fn group_of(&self, name: &str) -> Option<usize> {
        self.joint_groups.iter().position(|g| g.iter().any(|n| n == name))
    }

    /// Rooted, acyclic, every node reachable exactly once.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.root.as_str()];
        while let Some(name) = stack.pop() {
            if !seen.insert(name) {
                return Err(Error::InvalidArgument(format!(
                    "node `{name}` is reached twice: the hierarchy must be a tree"
                )));
            }
            let node = self.node(name)?;
            if node.children.is_empty() && node.relation.is_none() {
                return Err(Error::InvalidArgument(format!("leaf `{name}` has no relation")));
            }
            stack.extend(node.children.iter().map(String::as_str));
        }
        if seen.len() != self.nodes.len() {
            return Err(Error::InvalidArgument("some nodes are unreachable from the root".into()));
        }
        Ok(())
    }

    /// Inputs of `name`, expanding children that share its joint group.
    fn inputs(&self, name: &str, group: Option<usize>) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for c in &self.node(name)?.children {
            if group.is_some() && self.group_of(c) == group && !self.node(c)?.children.is_empty() {
                out.extend(self.inputs(c, group)?);
            } else {
                out.push(c.clone());
            }
        }
        Ok(out)
    }

    fn fold(&self, name: &str) -> Result<Relation> {
        let node = self.node(name)?;
        if node.children.is_empty() {
            return Ok(node.relation.clone().expect("validated leaf"));
        }
        let aggregator = node
            .aggregator
            .as_ref()
            .ok_or_else(|| Error::UnconfiguredNode(name.to_string()))?;
        let mut inputs = Vec::new();
        for child in self.inputs(name, self.group_of(name))? {
            let r = self.fold(&child)?;
            inputs.push((child, r));
        }
        aggregator.apply(&inputs)
    }
}

/// Folds the hierarchy bottom-up and returns the root relation.
pub fn aggregate_hierarchy(tree: &DimensionTree) -> Result<Relation> {
    tree.validate()?;
    tree.fold(&tree.root)
}
