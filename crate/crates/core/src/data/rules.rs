//! Ordered rule tables mapping grasp semantics to suitability labels.
//!
//! A rule matches on task, object state, grasp affordance, grasp material and
//! an optional condition over the affordances of the whole object. The first
//! matching rule decides the label; if none matches the table default applies.

use serde::{Deserialize, Serialize};

use super::types::GraspLabel;
use crate::error::CageError;

/// `*` or an explicit set of accepted labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Pattern {
    #[default]
    Any,
    OneOf(Vec<String>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PatternRepr {
    Wildcard(String),
    Labels(Vec<String>),
}

impl Serialize for Pattern {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Pattern::Any => s.serialize_str("*"),
            Pattern::OneOf(labels) => labels.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Pattern {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match PatternRepr::deserialize(d)? {
            PatternRepr::Wildcard(w) if w == "*" => Ok(Pattern::Any),
            PatternRepr::Wildcard(w) => Err(serde::de::Error::custom(format!(
                "expected `*` or a label list, found `{w}`"
            ))),
            PatternRepr::Labels(labels) => Ok(Pattern::OneOf(labels)),
        }
    }
}

impl Pattern {
    pub fn one_of(labels: &[&str]) -> Self {
        Pattern::OneOf(labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn matches(&self, label: &str) -> bool {
        match self {
            Pattern::Any => true,
            Pattern::OneOf(set) => set.iter().any(|l| l == label),
        }
    }
}

/// Condition on the set of part affordances of the grasped object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PartCondition {
    #[default]
    Any,
    /// The object has at least one part with one of these affordances.
    HasAny(Vec<String>),
    /// The object has no part with any of these affordances.
    LacksAll(Vec<String>),
}

impl PartCondition {
    pub fn matches<'a>(&self, mut part_affordances: impl Iterator<Item = &'a str>) -> bool {
        match self {
            PartCondition::Any => true,
            PartCondition::HasAny(set) => part_affordances.any(|a| set.iter().any(|s| s == a)),
            PartCondition::LacksAll(set) => !part_affordances.any(|a| set.iter().any(|s| s == a)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    #[serde(default)]
    pub task: Pattern,
    #[serde(default)]
    pub state: Pattern,
    #[serde(default)]
    pub grasp_affordance: Pattern,
    #[serde(default)]
    pub grasp_material: Pattern,
    #[serde(default)]
    pub object_parts: PartCondition,
    pub label: GraspLabel,
}

impl Rule {
    pub fn new(label: GraspLabel) -> Self {
        Rule {
            task: Pattern::Any,
            state: Pattern::Any,
            grasp_affordance: Pattern::Any,
            grasp_material: Pattern::Any,
            object_parts: PartCondition::Any,
            label,
        }
    }

    pub fn task(mut self, task: &str) -> Self {
        self.task = Pattern::one_of(&[task]);
        self
    }

    pub fn tasks(mut self, tasks: &[&str]) -> Self {
        self.task = Pattern::one_of(tasks);
        self
    }

    pub fn states(mut self, states: &[&str]) -> Self {
        self.state = Pattern::one_of(states);
        self
    }

    pub fn affordances(mut self, affordances: &[&str]) -> Self {
        self.grasp_affordance = Pattern::one_of(affordances);
        self
    }

    pub fn materials(mut self, materials: &[&str]) -> Self {
        self.grasp_material = Pattern::one_of(materials);
        self
    }

    pub fn has_any(mut self, affordances: &[&str]) -> Self {
        self.object_parts = PartCondition::HasAny(affordances.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn lacks_all(mut self, affordances: &[&str]) -> Self {
        self.object_parts = PartCondition::LacksAll(affordances.iter().map(|s| s.to_string()).collect());
        self
    }
}

/// Everything a rule may look at for one (context, grasp) pair.
#[derive(Debug, Clone, Copy)]
pub struct RuleQuery<'a> {
    pub task: &'a str,
    pub state: &'a str,
    pub grasp_affordance: &'a str,
    pub grasp_material: &'a str,
    pub part_affordances: &'a [&'a str],
}

impl Rule {
    pub fn matches(&self, q: &RuleQuery<'_>) -> bool {
        self.task.matches(q.task)
            && self.state.matches(q.state)
            && self.grasp_affordance.matches(q.grasp_affordance)
            && self.grasp_material.matches(q.grasp_material)
            && self.object_parts.matches(q.part_affordances.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleTable {
    pub rules: Vec<Rule>,
    pub default_label: GraspLabel,
}

/// Tasks in which the object is held by the part that is grasped.
const HOLDING: &[&str] = &["pour", "lift", "handover", "scoop"];

/// Affordances the permutation tables rotate over.
/// Affordance groups rotated by the permutation tables. Every affordance the
/// generator places on a part belongs to one group.
const ROTATED: [&[&str]; 3] = [&["contain", "scoop"], &["wrap_grasp", "support"], &["grasp", "none"]];

/// All orderings of `ROTATED`; entry `k + 3` is the reverse of entry `k`.
const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0], [0, 2, 1], [1, 0, 2]];

impl RuleTable {
    pub fn new(rules: Vec<Rule>, default_label: GraspLabel) -> crate::Result<Self> {
        if rules.is_empty() {
            return Err(CageError::Config("rule table is empty".into()));
        }
        Ok(RuleTable { rules, default_label })
    }

    /// Label of the first matching rule, or the default label.
    pub fn label(&self, q: &RuleQuery<'_>) -> GraspLabel {
        self.rules
            .iter()
            .find(|r| r.matches(q))
            .map_or(self.default_label, |r| r.label)
    }

    /// The household rule table used by default.
    pub fn household() -> Self {
        use GraspLabel::{Neutral as N, NotSuitable as X, Suitable as S};
        let r = Rule::new;
        let rules = vec![
            // hot bodies of heat-conducting or heat-retaining material cannot be held
            r(X).tasks(HOLDING)
                .states(&["hot"])
                .affordances(&["contain", "wrap_grasp"])
                .materials(&["metal", "ceramic", "glass", "stone"]),
            r(X).tasks(HOLDING).states(&["hot"]).affordances(&["grasp"]).materials(&["metal"]),
            // pour
            r(X).task("pour").lacks_all(&["contain"]),
            r(X).task("pour").affordances(&["contain"]),
            r(N).task("pour").states(&["filled"]).affordances(&["wrap_grasp"]).materials(&["paper"]),
            r(S).task("pour").affordances(&["grasp"]),
            r(S).task("pour").affordances(&["wrap_grasp"]).lacks_all(&["grasp"]),
            r(N).task("pour"),
            // scoop
            r(X).task("scoop").lacks_all(&["contain", "scoop"]),
            r(X).task("scoop").has_any(&["none"]),
            r(X).task("scoop").affordances(&["contain", "scoop"]),
            r(S).task("scoop").affordances(&["grasp", "wrap_grasp"]),
            r(N).task("scoop"),
            // poke
            r(X).task("poke").lacks_all(&["support", "scoop"]),
            r(S).task("poke").affordances(&["grasp"]),
            r(X).task("poke"),
            // cut
            r(X).task("cut").lacks_all(&["support"]),
            r(S).task("cut").affordances(&["grasp"]).materials(&["wood", "plastic"]),
            r(N).task("cut").affordances(&["grasp"]),
            r(X).task("cut"),
            // lift
            r(X).task("lift").states(&["filled"]).affordances(&["contain"]),
            r(N).task("lift").states(&["filled"]).affordances(&["wrap_grasp"]).materials(&["paper", "plastic"]),
            r(S).task("lift").affordances(&["grasp", "wrap_grasp"]),
            r(N).task("lift"),
            // hammer
            r(X).task("hammer").lacks_all(&["hit", "support"]),
            r(X).task("hammer").materials(&["ceramic", "glass", "paper"]),
            r(X).task("hammer").lacks_all(&["grasp"]),
            r(S).task("hammer").affordances(&["grasp"]),
            r(X).task("hammer"),
            // handover
            r(X).task("handover").states(&["hot", "filled"]).affordances(&["contain"]),
            r(N).task("handover").states(&["empty"]).affordances(&["contain"]),
            r(N).task("handover").states(&["cold"]).affordances(&["wrap_grasp"]).materials(&["glass", "metal"]),
            r(S).task("handover").affordances(&["wrap_grasp"]),
            r(S).task("handover").affordances(&["grasp"]).lacks_all(&["wrap_grasp"]),
            r(N).task("handover"),
        ];
        RuleTable {
            rules,
            default_label: N,
        }
    }

    /// Rotates which affordance group is suitable, neutral and not suitable as a
    /// function of (task index, state index). Labels never look at the other
    /// parts of the object, so they carry over to unseen classes.
    fn permutation_table(tasks: &[&str], states: &[&str], pick: impl Fn(usize, usize) -> usize) -> Self {
        use GraspLabel::{Neutral as N, NotSuitable as X, Suitable as S};
        let mut rules = Vec::new();
        for (ti, task) in tasks.iter().enumerate() {
            for (si, state) in states.iter().enumerate() {
                let [first, second, third] = PERMUTATIONS[pick(ti, si) % PERMUTATIONS.len()].map(|k| ROTATED[k]);
                let base = |label| Rule::new(label).task(task).states(&[state]);
                rules.push(base(S).affordances(first));
                rules.push(base(N).affordances(second));
                rules.push(base(X).affordances(third));
            }
        }
        RuleTable {
            rules,
            default_label: N,
        }
    }

    /// Labels depend jointly on task and state: neither alone determines the ordering.
    /// With six states every task sees each ordering once, so per task each rotated
    /// affordance is suitable, neutral and unsuitable equally often.
    pub fn task_state(tasks: &[&str], states: &[&str]) -> Self {
        Self::permutation_table(tasks, states, |t, s| t + s)
    }
}
