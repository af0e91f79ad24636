//! Reference-point evaluation of game positions.
//!
//! Net utility is always measured against a reference position. The
//! incremental evaluator walks positions `1, 2, ...`, measures each one
//! against the best reference found so far and moves the reference only on
//! strict improvement, so among equally good positions the cheapest (fewest
//! tosses) is kept.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::game::{position, GamePosition, GameSpec, MAX_POSITION};
use crate::rational::format_ratio;

/// Header row of the tab-separated evaluation trace.
pub const TRACE_HEADER: &str = "step\tcurr_pos\tnuc\tnuc_star\tref_pos";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferencePoint {
    position: GamePosition,
    utility: BigRational,
}

impl ReferencePoint {
    pub fn new(position: GamePosition) -> Self {
        let utility = position.expected_payoff.clone();
        ReferencePoint { position, utility }
    }

    /// Staying out of the game: the break-even baseline with utility 0.
    pub fn fold() -> Self {
        ReferencePoint::new(GamePosition::fold())
    }

    pub fn position(&self) -> &GamePosition {
        &self.position
    }

    pub fn utility(&self) -> &BigRational {
        &self.utility
    }
}

/// `u(p) - u(reference)`.
pub fn net_utility_vs_reference(p: &GamePosition, reference: &ReferencePoint) -> BigRational {
    &p.expected_payoff - reference.utility()
}

/// Canonical expected utility: one half for every played position, zero for fold.
pub fn canonical_expected_utility(k: u32) -> BigRational {
    position(k).expected_payoff
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerminationCriterion {
    /// Stop once this position index has been evaluated.
    Horizon(u32),
    /// Stop after this many consecutive steps without strict improvement.
    Patience(u32),
    /// Each step costs one toss duration; stop before the next step would
    /// push the cumulative cost over this cap. The first step always runs.
    Budget(BigRational),
}

impl Default for TerminationCriterion {
    fn default() -> Self {
        TerminationCriterion::Patience(3)
    }
}

impl TerminationCriterion {
    pub fn validate(&self) -> Result<()> {
        match self {
            TerminationCriterion::Horizon(0) => {
                Err(Error::invalid("horizon", "must be at least 1"))
            }
            TerminationCriterion::Patience(0) => {
                Err(Error::invalid("patience", "must be at least 1"))
            }
            TerminationCriterion::Budget(b) if *b <= BigRational::zero() => {
                Err(Error::invalid("eval_budget", "must be positive"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub step: u32,
    pub curr_pos: u32,
    pub nuc: BigRational,
    pub nuc_star: BigRational,
    pub ref_pos: u32,
}

impl TraceStep {
    pub fn to_tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.step,
            self.curr_pos,
            format_ratio(&self.nuc),
            format_ratio(&self.nuc_star),
            self.ref_pos
        )
    }
}

/// Final loop state plus every step taken to reach it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationTrace {
    pub ref_pos: u32,
    pub curr_pos: u32,
    pub nuc: BigRational,
    pub nuc_star: BigRational,
    pub steps: Vec<TraceStep>,
}

impl EvaluationTrace {
    fn start() -> Self {
        EvaluationTrace {
            ref_pos: 0,
            curr_pos: 0,
            nuc: BigRational::zero(),
            nuc_star: BigRational::zero(),
            steps: Vec::new(),
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(TRACE_HEADER);
        out.push('\n');
        for s in &self.steps {
            out.push_str(&s.to_tsv_row());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub nuc_star: BigRational,
    pub ref_pos: u32,
    pub trace: EvaluationTrace,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvaluationOptions {
    /// Subtract the buy-in from the utility of every played position.
    pub net_of_cost: bool,
}

/// Runs the incremental evaluation on the canonical game utilities.
pub fn incremental_evaluate(g: &GameSpec, term: &TerminationCriterion) -> Result<Evaluation> {
    incremental_evaluate_with(
        g,
        term,
        &EvaluationOptions::default(),
        canonical_expected_utility,
    )
}

/// Runs the incremental evaluation with a caller-supplied expected utility
/// per position (`eu(0)` is the fold baseline).
pub fn incremental_evaluate_with<F>(
    g: &GameSpec,
    term: &TerminationCriterion,
    opts: &EvaluationOptions,
    eu: F,
) -> Result<Evaluation>
where
    F: Fn(u32) -> BigRational,
{
    term.validate()?;
    let utility = |k: u32| {
        let u = eu(k);
        if opts.net_of_cost && k > 0 {
            u - g.buy_in()
        } else {
            u
        }
    };

    let mut state = EvaluationTrace::start();
    let mut ref_utility = utility(0);
    let mut stale = 0u32;
    let mut spent = BigRational::zero();

    loop {
        state.curr_pos += 1;
        let current = utility(state.curr_pos);
        state.nuc = &current - &ref_utility;
        if state.nuc > state.nuc_star {
            state.nuc_star = state.nuc.clone();
            state.ref_pos = state.curr_pos;
            ref_utility = current;
            stale = 0;
        } else {
            stale += 1;
        }
        spent += g.toss_duration();
        state.steps.push(TraceStep {
            step: state.steps.len() as u32 + 1,
            curr_pos: state.curr_pos,
            nuc: state.nuc.clone(),
            nuc_star: state.nuc_star.clone(),
            ref_pos: state.ref_pos,
        });

        let done = state.curr_pos >= g.horizon()
            || match term {
                TerminationCriterion::Horizon(h) => state.curr_pos >= *h,
                TerminationCriterion::Patience(p) => stale >= *p,
                TerminationCriterion::Budget(cap) => &spent + g.toss_duration() > *cap,
            };
        if done {
            break;
        }
    }

    Ok(Evaluation {
        nuc_star: state.nuc_star.clone(),
        ref_pos: state.ref_pos,
        trace: state,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelativeRow {
    pub k: u32,
    /// Against the fold position.
    pub net_utility: BigRational,
    /// Against the best position found before `k`.
    pub relative_net_utility: BigRational,
}

/// Net utility of positions `1..=n` against fold and against the moving
/// reference.
pub fn relative_net_utility_table(n: u32) -> Result<Vec<RelativeRow>> {
    if n == 0 {
        return Err(Error::invalid("n", "table needs at least one position"));
    }
    if n > MAX_POSITION {
        return Err(Error::invalid(
            "n",
            format!("at most {MAX_POSITION} positions, got {n}"),
        ));
    }
    let spec = GameSpec::canonical();
    let horizon = TerminationCriterion::Horizon(n);
    let eval = incremental_evaluate(&spec, &horizon)?;
    let fold = ReferencePoint::fold();
    Ok(eval
        .trace
        .steps
        .iter()
        .map(|s| RelativeRow {
            k: s.curr_pos,
            net_utility: net_utility_vs_reference(&position(s.curr_pos), &fold),
            relative_net_utility: s.nuc.clone(),
        })
        .collect())
}

/// A candidate scored by utility and a priority-ordered resource vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternative {
    pub utility: BigRational,
    pub resources: Vec<BigRational>,
}

impl Alternative {
    pub fn new(utility: BigRational, resources: Vec<BigRational>) -> Self {
        Alternative { utility, resources }
    }

    /// A game of `tosses` tosses of duration `toss_duration` each.
    pub fn timed(utility: BigRational, tosses: u32, toss_duration: &BigRational) -> Self {
        let t = toss_duration * BigRational::from_integer(BigInt::from(tosses));
        Alternative::new(utility, vec![t])
    }

    /// `Greater` means `self` is preferred.
    fn preference(&self, other: &Self) -> Ordering {
        self.utility.cmp(&other.utility).then_with(|| {
            // fewer resources preferred
            other.resources.cmp(&self.resources)
        })
    }
}

/// Picks the alternative with the highest utility, then the lexicographically
/// smallest resource vector. Remaining ties go to the lowest index.
pub fn break_tie(alternatives: &[Alternative]) -> Result<usize> {
    let first = alternatives.first().ok_or(Error::NoAlternatives)?;
    let arity = first.resources.len();
    for (index, alt) in alternatives.iter().enumerate() {
        if alt.resources.len() != arity {
            return Err(Error::ResourceArity {
                index,
                expected: arity,
                found: alt.resources.len(),
            });
        }
    }
    let mut best = 0;
    for (i, alt) in alternatives.iter().enumerate().skip(1) {
        if alt.preference(&alternatives[best]) == Ordering::Greater {
            best = i;
        }
    }
    Ok(best)
}

/// Utility of the reference-point evaluation converted to a timed
/// alternative, for ranking against other offers.
pub fn evaluation_alternative(g: &GameSpec, eval: &Evaluation) -> Alternative {
    Alternative::timed(eval.nuc_star.clone(), eval.ref_pos, g.toss_duration())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn net_utility_against_fold_and_moving_reference() {
        let fold = ReferencePoint::fold();
        assert_eq!(net_utility_vs_reference(&position(1), &fold), q(1, 2));
        assert_eq!(net_utility_vs_reference(&position(5), &fold), q(1, 2));
        let first = ReferencePoint::new(position(1));
        assert_eq!(net_utility_vs_reference(&position(2), &first), q(0, 1));
    }

    #[test]
    fn self_reference_is_break_even() {
        for k in 0..20 {
            let p = position(k);
            assert!(net_utility_vs_reference(&p, &ReferencePoint::new(p.clone())).is_zero());
        }
    }

    #[test]
    fn relative_table_rows() {
        let rows = relative_net_utility_table(3).unwrap();
        let got: Vec<_> = rows
            .iter()
            .map(|r| (r.k, r.net_utility.clone(), r.relative_net_utility.clone()))
            .collect();
        assert_eq!(
            got,
            [
                (1, q(1, 2), q(1, 2)),
                (2, q(1, 2), q(0, 1)),
                (3, q(1, 2), q(0, 1))
            ]
        );
        assert_eq!(relative_net_utility_table(1).unwrap().len(), 1);
        assert!(relative_net_utility_table(0).is_err());
    }

    #[test]
    fn patience_three_visits_four_positions() {
        let eval = incremental_evaluate(&GameSpec::canonical(), &TerminationCriterion::Patience(3))
            .unwrap();
        assert_eq!(eval.nuc_star, q(1, 2));
        assert_eq!(eval.ref_pos, 1);
        let visited: Vec<u32> = eval.trace.steps.iter().map(|s| s.curr_pos).collect();
        assert_eq!(visited, [1, 2, 3, 4]);
    }

    #[test]
    fn horizon_one_stops_at_first_position() {
        let eval = incremental_evaluate(&GameSpec::canonical(), &TerminationCriterion::Horizon(1))
            .unwrap();
        assert_eq!((eval.nuc_star, eval.ref_pos), (q(1, 2), 1));
        assert_eq!(eval.trace.steps.len(), 1);
    }

    #[test]
    fn zero_prize_game_stays_folded() {
        let eval = incremental_evaluate_with(
            &GameSpec::canonical(),
            &TerminationCriterion::Horizon(50),
            &EvaluationOptions::default(),
            |_| BigRational::zero(),
        )
        .unwrap();
        assert!(eval.nuc_star.is_zero());
        assert_eq!(eval.ref_pos, 0);
    }

    #[test]
    fn budget_counts_toss_durations() {
        let g = GameSpec::new(q(0, 1), q(0, 1), q(1, 2), 100).unwrap();
        let eval = incremental_evaluate(&g, &TerminationCriterion::Budget(q(2, 1))).unwrap();
        // four steps of 1/2 each
        assert_eq!(eval.trace.steps.len(), 4);
        // a cap below one step still evaluates the first position
        let eval = incremental_evaluate(&g, &TerminationCriterion::Budget(q(1, 4))).unwrap();
        assert_eq!(eval.trace.steps.len(), 1);
        assert_eq!(eval.ref_pos, 1);
    }

    #[test]
    fn game_horizon_caps_the_loop() {
        let g = GameSpec::new(q(0, 1), q(0, 1), q(1, 1), 5).unwrap();
        let eval = incremental_evaluate(&g, &TerminationCriterion::Patience(100)).unwrap();
        assert_eq!(eval.trace.curr_pos, 5);
    }

    #[test]
    fn net_of_cost_folds_when_buy_in_too_high() {
        let g = GameSpec::new(q(1, 1), q(10, 1), q(1, 1), 100).unwrap();
        let opts = EvaluationOptions { net_of_cost: true };
        let eval = incremental_evaluate_with(
            &g,
            &TerminationCriterion::Patience(3),
            &opts,
            canonical_expected_utility,
        )
        .unwrap();
        assert_eq!(eval.ref_pos, 0);
        assert!(eval.nuc_star.is_zero());
        assert_eq!(eval.trace.steps[0].nuc, q(-1, 2));

        let cheap = GameSpec::new(q(1, 4), q(1, 1), q(1, 1), 100).unwrap();
        let eval = incremental_evaluate_with(
            &cheap,
            &TerminationCriterion::Patience(3),
            &opts,
            canonical_expected_utility,
        )
        .unwrap();
        assert_eq!((eval.nuc_star, eval.ref_pos), (q(1, 4), 1));
    }

    #[test]
    fn rejects_bad_criteria() {
        let g = GameSpec::canonical();
        for t in [
            TerminationCriterion::Horizon(0),
            TerminationCriterion::Patience(0),
            TerminationCriterion::Budget(q(0, 1)),
        ] {
            assert!(incremental_evaluate(&g, &t).is_err(), "{t:?}");
        }
    }

    #[test]
    fn trace_tsv() {
        let eval = incremental_evaluate(&GameSpec::canonical(), &TerminationCriterion::Horizon(2))
            .unwrap();
        assert_eq!(
            eval.trace.to_tsv(),
            "step\tcurr_pos\tnuc\tnuc_star\tref_pos\n1\t1\t1/2\t1/2\t1\n2\t2\t0\t1/2\t1\n"
        );
    }

    #[test]
    fn tie_break_prefers_fewest_tosses() {
        let eps = q(1, 1);
        let alts: Vec<_> = [3, 1, 2]
            .into_iter()
            .map(|k| Alternative::timed(q(1, 2), k, &eps))
            .collect();
        assert_eq!(break_tie(&alts).unwrap(), 1);
    }

    #[test]
    fn tie_break_utility_dominates() {
        let eps = q(1, 1);
        let alts = vec![
            Alternative::timed(q(1, 2), 1, &eps),
            Alternative::timed(q(3, 4), 9, &eps),
        ];
        assert_eq!(break_tie(&alts).unwrap(), 1);
        assert_eq!(break_tie(&alts[..1]).unwrap(), 0);
    }

    #[test]
    fn tie_break_lexicographic_and_stable() {
        let alts = vec![
            Alternative::new(q(1, 1), vec![q(2, 1), q(5, 1)]),
            Alternative::new(q(1, 1), vec![q(2, 1), q(3, 1)]),
            Alternative::new(q(1, 1), vec![q(2, 1), q(3, 1)]),
        ];
        assert_eq!(break_tie(&alts).unwrap(), 1);
    }

    #[test]
    fn tie_break_errors() {
        assert_eq!(break_tie(&[]), Err(Error::NoAlternatives));
        let alts = vec![
            Alternative::new(q(1, 1), vec![q(1, 1)]),
            Alternative::new(q(1, 1), vec![]),
        ];
        assert!(matches!(
            break_tie(&alts),
            Err(Error::ResourceArity { index: 1, .. })
        ));
    }
}
