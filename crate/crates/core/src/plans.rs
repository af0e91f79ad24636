//! Additive-utility action sequences.
//!
//! An action declares, for each variable it touches, the utility of that
//! variable before (`pre`) and after (`eff`) it runs. Its net utility is the
//! sum of the per-variable differences; variables it does not touch cancel
//! out. A plan's utility after its first `i` actions is the initial utility
//! plus the net utilities of those actions.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type VarUtilities = BTreeMap<String, BigRational>;

/// Longest plan [`truncate_oracle`] will enumerate.
pub const ORACLE_LIMIT: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StateUtility {
    pub values: VarUtilities,
}

impl StateUtility {
    pub fn new(values: VarUtilities) -> Self {
        StateUtility { values }
    }

    pub fn total(&self) -> BigRational {
        self.values
            .values()
            .fold(BigRational::zero(), |acc, v| acc + v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanAction {
    pub name: String,
    pub pre: VarUtilities,
    pub eff: VarUtilities,
    pub cost: BigRational,
    pub duration: BigRational,
}

impl PlanAction {
    /// Builds an action, checking that `pre` and `eff` cover the same
    /// variables and that cost and duration are non-negative.
    pub fn new(
        name: impl Into<String>,
        pre: VarUtilities,
        eff: VarUtilities,
        cost: BigRational,
        duration: BigRational,
    ) -> Result<Self> {
        let action = PlanAction {
            name: name.into(),
            pre,
            eff,
            cost,
            duration,
        };
        action.check_domain()?;
        for (field, value) in [("cost", &action.cost), ("duration", &action.duration)] {
            if value.is_negative() {
                return Err(Error::NegativeQuantity {
                    action: action.name.clone(),
                    field,
                    value: value.to_string(),
                });
            }
        }
        Ok(action)
    }

    /// Single-variable action moving `var` from `from` to `to` at no cost.
    pub fn single(name: impl Into<String>, var: &str, from: BigRational, to: BigRational) -> Self {
        PlanAction {
            name: name.into(),
            pre: BTreeMap::from([(var.to_string(), from)]),
            eff: BTreeMap::from([(var.to_string(), to)]),
            cost: BigRational::zero(),
            duration: BigRational::zero(),
        }
    }

    fn check_domain(&self) -> Result<()> {
        if self.pre.keys().eq(self.eff.keys()) {
            return Ok(());
        }
        let only_pre: Vec<&str> = self
            .pre
            .keys()
            .filter(|k| !self.eff.contains_key(*k))
            .map(String::as_str)
            .collect();
        let only_eff: Vec<&str> = self
            .eff
            .keys()
            .filter(|k| !self.pre.contains_key(*k))
            .map(String::as_str)
            .collect();
        Err(Error::DomainMismatch {
            action: self.name.clone(),
            detail: format!("pre only: {only_pre:?}, eff only: {only_eff:?}"),
        })
    }

    fn net_unchecked(&self) -> BigRational {
        self.eff
            .iter()
            .map(|(v, after)| after - &self.pre[v])
            .fold(BigRational::zero(), |acc, d| acc + d)
    }
}

/// `sum over v of eff[v] - pre[v]`.
pub fn net_utility_of_action(a: &PlanAction) -> Result<BigRational> {
    a.check_domain()?;
    Ok(a.net_unchecked())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preference {
    First,
    Second,
    Indifferent,
}

impl From<std::cmp::Ordering> for Preference {
    fn from(o: std::cmp::Ordering) -> Self {
        match o {
            std::cmp::Ordering::Greater => Preference::First,
            std::cmp::Ordering::Less => Preference::Second,
            std::cmp::Ordering::Equal => Preference::Indifferent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Negative,
    Zero,
    Positive,
}

impl Polarity {
    pub fn of(x: &BigRational) -> Self {
        if x.is_positive() {
            Polarity::Positive
        } else if x.is_negative() {
            Polarity::Negative
        } else {
            Polarity::Zero
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Negative => "negative",
            Polarity::Zero => "zero",
            Polarity::Positive => "positive",
        })
    }
}

/// Compares two actions by the utility of the state each leads to.
pub fn prefer_by_outcome(a1_outcome: &BigRational, a2_outcome: &BigRational) -> Preference {
    a1_outcome.cmp(a2_outcome).into()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetPreference {
    pub preference: Preference,
    pub net: (BigRational, BigRational),
    pub polarity: (Polarity, Polarity),
}

/// Compares two actions by net utility and reports the sign of each, so a
/// caller can see when even the preferred action loses utility.
pub fn prefer_by_net_utility(a1: &PlanAction, a2: &PlanAction) -> Result<NetPreference> {
    let n1 = net_utility_of_action(a1)?;
    let n2 = net_utility_of_action(a2)?;
    Ok(NetPreference {
        preference: n1.cmp(&n2).into(),
        polarity: (Polarity::of(&n1), Polarity::of(&n2)),
        net: (n1, n2),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    actions: Vec<PlanAction>,
    initial: StateUtility,
}

impl Plan {
    /// Validates every action and checks that each variable it touches is
    /// part of the initial state.
    pub fn new(actions: Vec<PlanAction>, initial: StateUtility) -> Result<Self> {
        for a in &actions {
            a.check_domain()?;
            for v in a.pre.keys() {
                if !initial.values.contains_key(v) {
                    return Err(Error::UnknownVariable {
                        action: a.name.clone(),
                        variable: v.clone(),
                    });
                }
            }
            for (field, value) in [("cost", &a.cost), ("duration", &a.duration)] {
                if value.is_negative() {
                    return Err(Error::NegativeQuantity {
                        action: a.name.clone(),
                        field,
                        value: value.to_string(),
                    });
                }
            }
        }
        Ok(Plan { actions, initial })
    }

    /// A chain of single-variable actions on `x`, starting from 0, whose net
    /// utilities are `deltas`. Each action has unit duration.
    pub fn from_net_utilities(deltas: &[BigRational]) -> Self {
        let mut level = BigRational::zero();
        let actions = deltas
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let next = &level + d;
                let mut a =
                    PlanAction::single(format!("a{}", i + 1), "x", level.clone(), next.clone());
                a.duration = BigRational::from_integer(BigInt::from(1));
                level = next;
                a
            })
            .collect();
        let initial = StateUtility::new(BTreeMap::from([("x".to_string(), BigRational::zero())]));
        Plan { actions, initial }
    }

    pub fn actions(&self) -> &[PlanAction] {
        &self.actions
    }

    pub fn initial(&self) -> &StateUtility {
        &self.initial
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn net_utilities(&self) -> Vec<BigRational> {
        self.actions.iter().map(PlanAction::net_unchecked).collect()
    }

    /// Utility after running the first `len` actions from the initial state.
    pub fn utility_after(&self, len: usize) -> BigRational {
        self.initial.total()
            + self.actions[..len]
                .iter()
                .map(PlanAction::net_unchecked)
                .fold(BigRational::zero(), |acc, d| acc + d)
    }

    /// Plan with the first `len` actions.
    pub fn prefix(&self, len: usize) -> Plan {
        Plan {
            actions: self.actions[..len].to_vec(),
            initial: self.initial.clone(),
        }
    }

    /// Plan with `action` appended; the action is validated like in [`Plan::new`].
    pub fn with_action(&self, action: PlanAction) -> Result<Plan> {
        let mut actions = self.actions.clone();
        actions.push(action);
        Plan::new(actions, self.initial.clone())
    }

    fn totals(&self, len: usize) -> (BigRational, BigRational) {
        self.actions[..len]
            .iter()
            .fold((BigRational::zero(), BigRational::zero()), |(c, d), a| {
                (c + &a.cost, d + &a.duration)
            })
    }

    fn result_for(
        &self,
        prefix_length: usize,
        prefix_utility: BigRational,
        full: BigRational,
    ) -> TruncationResult {
        let (prefix_cost, prefix_duration) = self.totals(prefix_length);
        TruncationResult {
            prefix_length,
            prefix_utility,
            full_utility: full,
            prefix_cost,
            prefix_duration,
        }
    }
}

/// Chosen prefix of a plan. Utilities are net changes from the initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncationResult {
    pub prefix_length: usize,
    pub prefix_utility: BigRational,
    pub full_utility: BigRational,
    pub prefix_cost: BigRational,
    pub prefix_duration: BigRational,
}

impl TruncationResult {
    /// Checks the result against `plan`: the prefix is at least as valuable
    /// as the whole plan, ends on a strictly positive action (or is empty),
    /// and consumes no more cost or time than the whole plan.
    pub fn check(&self, plan: &Plan) -> std::result::Result<(), String> {
        if self.prefix_utility < self.full_utility {
            return Err(format!(
                "prefix utility {} below full utility {}",
                self.prefix_utility, self.full_utility
            ));
        }
        if self.prefix_length > plan.len() {
            return Err("prefix longer than plan".into());
        }
        if self.prefix_length > 0 {
            let last = plan.actions[self.prefix_length - 1].net_unchecked();
            if !last.is_positive() {
                return Err(format!("last prefix action has net utility {last}"));
            }
        }
        let (cost, duration) = plan.totals(plan.len());
        if self.prefix_cost > cost || self.prefix_duration > duration {
            return Err("prefix consumes more than the full plan".into());
        }
        Ok(())
    }
}

/// Returns the shortest prefix with maximal cumulative net utility. The empty
/// prefix (doing nothing) is a candidate, so a plan that never improves on
/// its initial state truncates to nothing.
pub fn truncate(p: &Plan) -> TruncationResult {
    let mut running = BigRational::zero();
    let mut best = BigRational::zero();
    let mut best_len = 0;
    for (i, a) in p.actions.iter().enumerate() {
        running += a.net_unchecked();
        if running > best {
            best = running.clone();
            best_len = i + 1;
        }
    }
    p.result_for(best_len, best, running)
}

/// Exhaustive reference for [`truncate`]: scores every prefix from scratch.
pub fn truncate_oracle(p: &Plan) -> Result<TruncationResult> {
    if p.len() > ORACLE_LIMIT {
        return Err(Error::PlanTooLong {
            len: p.len(),
            limit: ORACLE_LIMIT,
        });
    }
    let base = p.initial.total();
    let scores: Vec<BigRational> = (0..=p.len()).map(|i| p.utility_after(i) - &base).collect();
    let max = scores
        .iter()
        .max()
        .expect("empty prefix always present")
        .clone();
    let len = scores
        .iter()
        .position(|s| *s == max)
        .expect("max is attained");
    let full = scores.last().expect("non-empty").clone();
    Ok(p.result_for(len, max, full))
}

#[derive(Debug, Serialize, Deserialize)]
struct ActionDocument {
    name: String,
    #[serde(default)]
    pre: BTreeMap<String, Rational>,
    #[serde(default)]
    eff: BTreeMap<String, Rational>,
    #[serde(default)]
    cost: Rational,
    #[serde(default)]
    duration: Rational,
}

#[derive(Debug, Serialize, Deserialize)]
struct PlanDocument {
    #[serde(default)]
    initial: BTreeMap<String, Rational>,
    #[serde(default)]
    actions: Vec<ActionDocument>,
}

fn unwrap_map(m: BTreeMap<String, Rational>) -> VarUtilities {
    m.into_iter().map(|(k, v)| (k, v.into_inner())).collect()
}

fn wrap_map(m: &VarUtilities) -> BTreeMap<String, Rational> {
    m.iter()
        .map(|(k, v)| (k.clone(), Rational(v.clone())))
        .collect()
}

impl Plan {
    /// Parses a TOML plan document with an `initial` table and an
    /// `actions` array of `{ name, pre, eff, cost, duration }`.
    pub fn from_toml(text: &str) -> Result<Plan> {
        let doc: PlanDocument = toml::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        let actions = doc
            .actions
            .into_iter()
            .map(|a| {
                PlanAction::new(
                    a.name,
                    unwrap_map(a.pre),
                    unwrap_map(a.eff),
                    a.cost.into_inner(),
                    a.duration.into_inner(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Plan::new(actions, StateUtility::new(unwrap_map(doc.initial)))
    }

    pub fn to_toml(&self) -> String {
        let doc = PlanDocument {
            initial: wrap_map(&self.initial.values),
            actions: self
                .actions
                .iter()
                .map(|a| ActionDocument {
                    name: a.name.clone(),
                    pre: wrap_map(&a.pre),
                    eff: wrap_map(&a.eff),
                    cost: Rational(a.cost.clone()),
                    duration: Rational(a.duration.clone()),
                })
                .collect(),
        };
        toml::to_string(&doc).expect("plan documents always serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub prefix_length: usize,
    pub prefix_utility: Rational,
    pub full_utility: Rational,
    pub prefix_cost: Rational,
    pub prefix_duration: Rational,
    pub prefix_actions: Vec<String>,
}

impl TruncationReport {
    pub fn new(plan: &Plan, r: &TruncationResult) -> Self {
        TruncationReport {
            prefix_length: r.prefix_length,
            prefix_utility: Rational(r.prefix_utility.clone()),
            full_utility: Rational(r.full_utility.clone()),
            prefix_cost: Rational(r.prefix_cost.clone()),
            prefix_duration: Rational(r.prefix_duration.clone()),
            prefix_actions: plan.actions[..r.prefix_length]
                .iter()
                .map(|a| a.name.clone())
                .collect(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("reports always serialize")
    }
}
