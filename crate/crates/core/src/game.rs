//! Exact model of the doubling coin-toss game.
//!
//! Position `k >= 1` is the game in which heads first shows on toss `k`: it
//! happens with probability `2^-k` and pays `2^(k-1)` ducats, so every
//! position carries an expected payoff of exactly one half. Position `0` is
//! the fold (stay out of the game) row with no probability and zero payoff.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::format_ratio;

/// Largest position index a payoff table or transform series may reach.
pub const MAX_POSITION: u32 = 1024;

/// Smallest prize a player who buys in can walk away with.
pub const MIN_WIN: u32 = 1;

/// Header row of the tab-separated payoff table.
pub const TABLE_HEADER: &str = "k\tprobability\tprize\texpected_payoff";

/// One row of the payoff table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GamePosition {
    pub k: u32,
    /// `None` for the fold row.
    pub probability: Option<BigRational>,
    pub prize: BigUint,
    pub expected_payoff: BigRational,
}

impl GamePosition {
    pub fn fold() -> Self {
        GamePosition {
            k: 0,
            probability: None,
            prize: BigUint::zero(),
            expected_payoff: BigRational::zero(),
        }
    }

    pub fn is_fold(&self) -> bool {
        self.k == 0
    }

    /// Checks the row against the closed forms `2^-k`, `2^(k-1)` and `1/2`.
    pub fn is_consistent(&self) -> bool {
        if self.k == 0 {
            return self.probability.is_none()
                && self.prize.is_zero()
                && self.expected_payoff.is_zero();
        }
        let expected = position(self.k);
        let Some(p) = &self.probability else {
            return false;
        };
        *p == expected.probability.unwrap()
            && self.prize == expected.prize
            && self.expected_payoff
                == p * BigRational::from_integer(BigInt::from(self.prize.clone()))
            && self.expected_payoff == half()
    }

    /// Tab-separated row matching [`TABLE_HEADER`]. The fold row prints `-`
    /// for its missing probability.
    pub fn to_tsv_row(&self) -> String {
        let p = self
            .probability
            .as_ref()
            .map(format_ratio)
            .unwrap_or_else(|| "-".to_string());
        format!(
            "{}\t{}\t{}\t{}",
            self.k,
            p,
            self.prize,
            format_ratio(&self.expected_payoff)
        )
    }

    pub fn from_tsv_row(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [k, p, prize, ep] = fields[..] else {
            return Err(Error::Document(format!(
                "expected 4 tab-separated fields, got {}",
                fields.len()
            )));
        };
        let k: u32 = k
            .parse()
            .map_err(|_| Error::Document(format!("bad position index `{k}`")))?;
        let probability = match p {
            "-" => None,
            s => Some(crate::rational::parse_ratio(s)?),
        };
        let prize: BigUint = prize
            .parse()
            .map_err(|_| Error::Document(format!("bad prize `{prize}`")))?;
        Ok(GamePosition {
            k,
            probability,
            prize,
            expected_payoff: crate::rational::parse_ratio(ep)?,
        })
    }
}

fn half() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(2))
}

pub(crate) fn pow2(exp: u32) -> BigUint {
    BigUint::one() << exp as usize
}

/// Returns the exact row for position `k` (`0` is the fold row).
pub fn position(k: u32) -> GamePosition {
    if k == 0 {
        return GamePosition::fold();
    }
    let probability = BigRational::new(BigInt::one(), BigInt::from(pow2(k)));
    let prize = pow2(k - 1);
    let expected_payoff = &probability * BigRational::from_integer(BigInt::from(prize.clone()));
    GamePosition {
        k,
        probability: Some(probability),
        prize,
        expected_payoff,
    }
}

/// Rows `1..=n`, optionally preceded by the fold row.
pub fn payoff_table(n: u32, include_fold: bool) -> Result<Vec<GamePosition>> {
    if n == 0 {
        return Err(Error::invalid("n", "table needs at least one position"));
    }
    if n > MAX_POSITION {
        return Err(Error::invalid(
            "n",
            format!("at most {MAX_POSITION} positions, got {n}"),
        ));
    }
    let start = if include_fold { 0 } else { 1 };
    Ok((start..=n).map(position).collect())
}

pub fn render_table(rows: &[GamePosition]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_tsv_row());
        out.push('\n');
    }
    out
}

/// Parses the output of [`render_table`].
pub fn parse_table(text: &str) -> Result<Vec<GamePosition>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TABLE_HEADER => {}
        other => {
            return Err(Error::Document(format!(
                "unexpected table header {other:?}"
            )))
        }
    }
    lines
        .filter(|l| !l.is_empty())
        .map(GamePosition::from_tsv_row)
        .collect()
}

/// True iff accumulated values exactly balance accumulated costs.
pub fn is_break_even(costs: &[BigRational], values: &[BigRational]) -> bool {
    let total = |xs: &[BigRational]| xs.iter().fold(BigRational::zero(), |acc, x| acc + x);
    total(costs) == total(values)
}

/// Buy-in, bankroll and timing of one offer of the game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSpec {
    buy_in: BigRational,
    budget: BigRational,
    toss_duration: BigRational,
    horizon: u32,
}

impl GameSpec {
    pub fn new(
        buy_in: BigRational,
        budget: BigRational,
        toss_duration: BigRational,
        horizon: u32,
    ) -> Result<Self> {
        if buy_in < BigRational::zero() {
            return Err(Error::invalid("buy_in", "must be non-negative"));
        }
        if budget < BigRational::zero() {
            return Err(Error::invalid("budget", "must be non-negative"));
        }
        if buy_in > budget {
            return Err(Error::Unaffordable {
                cost: format_ratio(&buy_in),
                budget: format_ratio(&budget),
            });
        }
        if toss_duration <= BigRational::zero() {
            return Err(Error::invalid("toss_duration", "must be positive"));
        }
        if horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        Ok(GameSpec {
            buy_in,
            budget,
            toss_duration,
            horizon,
        })
    }

    /// Free game, zero budget, unit toss duration, horizon [`MAX_POSITION`].
    pub fn canonical() -> Self {
        GameSpec {
            buy_in: BigRational::zero(),
            budget: BigRational::zero(),
            toss_duration: BigRational::one(),
            horizon: MAX_POSITION,
        }
    }

    pub fn buy_in(&self) -> &BigRational {
        &self.buy_in
    }

    pub fn budget(&self) -> &BigRational {
        &self.budget
    }

    pub fn toss_duration(&self) -> &BigRational {
        &self.toss_duration
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// Time spent playing position `k`: `k` tosses.
    pub fn duration_of(&self, k: u32) -> BigRational {
        &self.toss_duration * BigRational::from_integer(BigInt::from(k))
    }
}

type PrizeMap = dyn Fn(&BigUint) -> f64 + Send + Sync;

/// Monotone map from prize (ducats) to utility.
#[derive(Clone)]
pub enum UtilityTransform {
    Identity,
    NaturalLog,
    SquareRoot,
    /// Caller-supplied map; expected to be monotone non-decreasing and bounded.
    Custom(Arc<PrizeMap>),
}

impl fmt::Debug for UtilityTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilityTransform::Identity => f.write_str("Identity"),
            UtilityTransform::NaturalLog => f.write_str("NaturalLog"),
            UtilityTransform::SquareRoot => f.write_str("SquareRoot"),
            UtilityTransform::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl UtilityTransform {
    pub fn custom(f: impl Fn(&BigUint) -> f64 + Send + Sync + 'static) -> Self {
        UtilityTransform::Custom(Arc::new(f))
    }

    pub fn apply(&self, prize: &BigUint) -> f64 {
        let x = prize.to_f64().unwrap_or(f64::INFINITY);
        match self {
            UtilityTransform::Identity => x,
            UtilityTransform::NaturalLog => x.ln(),
            UtilityTransform::SquareRoot => x.sqrt(),
            UtilityTransform::Custom(f) => f(prize),
        }
    }
}

impl std::str::FromStr for UtilityTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(UtilityTransform::Identity),
            "log" | "ln" => Ok(UtilityTransform::NaturalLog),
            "sqrt" => Ok(UtilityTransform::SquareRoot),
            other => Err(Error::invalid(
                "kind",
                format!("unknown transform `{other}` (expected identity, log or sqrt)"),
            )),
        }
    }
}

/// Partial sums `S_1..=S_n` of `sum_k 2^-k * t(prize(k))`.
pub fn transformed_partial_sums(t: &UtilityTransform, n_terms: u32) -> Result<Vec<f64>> {
    if n_terms == 0 {
        return Err(Error::invalid("n_terms", "must be at least 1"));
    }
    if n_terms > MAX_POSITION {
        return Err(Error::invalid(
            "n_terms",
            format!("at most {MAX_POSITION} terms, got {n_terms}"),
        ));
    }
    let mut sums = Vec::with_capacity(n_terms as usize);
    let mut acc = 0.0_f64;
    for k in 1..=n_terms {
        let prize = pow2(k - 1);
        let u = t.apply(&prize);
        if !u.is_finite() {
            return Err(Error::TransformUndefined {
                prize: prize.to_string(),
                value: u.to_string(),
            });
        }
        acc += (-(k as f64)).exp2() * u;
        sums.push(acc);
    }
    Ok(sums)
}

/// `sum_{k=1..n} 2^-k * t(prize(k))`.
pub fn transformed_expected_utility(t: &UtilityTransform, n_terms: u32) -> Result<f64> {
    transformed_partial_sums(t, n_terms).map(|s| *s.last().expect("n_terms >= 1"))
}
