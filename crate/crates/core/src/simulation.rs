//! Seeded Monte Carlo play of the bounded game.
//!
//! A game is: pay the buy-in, then toss a fair coin until heads or until
//! `max_tosses` tails in a row. Heads on toss `k` pays `2^(k-1)`; running out
//! of tosses pays nothing, so the exact expectation is `max_tosses / 2`.
//!
//! Every trial draws from its own ChaCha stream selected by the trial index,
//! and trials are tallied into a histogram of ending positions. Histograms
//! merge by addition, so the report does not depend on how trials are split
//! across threads.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{pow2, MAX_POSITION};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

pub trait Coin {
    /// Tosses once; `true` is heads.
    fn heads(&mut self) -> bool;
}

/// Hands out an independent coin per trial.
pub trait CoinSource: Sync {
    type Coin: Coin;

    fn coin(&self, trial: u64) -> Self::Coin;
}

/// Fair coins drawn from ChaCha8, one stream per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededCoins {
    seed: u64,
}

impl SeededCoins {
    pub fn new(seed: u64) -> Self {
        SeededCoins { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

pub struct ChaChaCoin {
    rng: ChaCha8Rng,
    word: u64,
    bits: u32,
}

impl Coin for ChaChaCoin {
    fn heads(&mut self) -> bool {
        if self.bits == 0 {
            self.word = self.rng.next_u64();
            self.bits = 64;
        }
        let bit = self.word & 1 == 1;
        self.word >>= 1;
        self.bits -= 1;
        bit
    }
}

impl CoinSource for SeededCoins {
    type Coin = ChaChaCoin;

    fn coin(&self, trial: u64) -> ChaChaCoin {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        ChaChaCoin {
            rng,
            word: 0,
            bits: 0,
        }
    }
}

/// A coin that always lands the same way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedCoin {
    pub heads: bool,
}

impl FixedCoin {
    pub fn two_headed() -> Self {
        FixedCoin { heads: true }
    }

    pub fn two_tailed() -> Self {
        FixedCoin { heads: false }
    }
}

impl Coin for FixedCoin {
    fn heads(&mut self) -> bool {
        self.heads
    }
}

impl CoinSource for FixedCoin {
    type Coin = FixedCoin;

    fn coin(&self, _trial: u64) -> FixedCoin {
        *self
    }
}

/// Plays one bounded game. Returns the toss that came up heads, or `0` when
/// all `max_tosses` tosses were tails.
pub fn play<C: Coin>(coin: &mut C, max_tosses: u32) -> u32 {
    (1..=max_tosses).find(|_| coin.heads()).unwrap_or(0)
}

/// Number of games ending at each position; index 0 counts all-tails games.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    counts: Vec<u64>,
}

impl Tally {
    fn new(max_tosses: u32) -> Self {
        Tally {
            counts: vec![0; max_tosses as usize + 1],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn trials(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Exact `(sum of payoffs, sum of squared payoffs)`.
    pub fn payoff_sums(&self) -> (BigUint, BigUint) {
        let mut sum = BigUint::zero();
        let mut sum_sq = BigUint::zero();
        for (k, &n) in self.counts.iter().enumerate().skip(1) {
            let prize = pow2(k as u32 - 1);
            sum += &prize * n;
            sum_sq += &prize * &prize * n;
        }
        (sum, sum_sq)
    }
}

fn check_params(max_tosses: u32, trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    if max_tosses == 0 {
        return Err(Error::invalid("max_tosses", "must be at least 1"));
    }
    if max_tosses > MAX_POSITION {
        return Err(Error::invalid(
            "max_tosses",
            format!("at most {MAX_POSITION}, got {max_tosses}"),
        ));
    }
    Ok(())
}

/// Plays `trials` games in parallel and counts where each one ended.
pub fn tally<S: CoinSource>(source: &S, max_tosses: u32, trials: u64) -> Result<Tally> {
    check_params(max_tosses, trials)?;
    Ok((0..trials)
        .into_par_iter()
        .fold(
            || Tally::new(max_tosses),
            |mut t, trial| {
                let k = play(&mut source.coin(trial), max_tosses);
                t.counts[k as usize] += 1;
                t
            },
        )
        .reduce(|| Tally::new(max_tosses), Tally::merge))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub max_tosses: u32,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    /// `max_tosses / 2`.
    pub exact_mean: String,
    /// Whether the empirical mean lies within four standard errors of the
    /// exact mean. A `false` here is a flag, not a failure.
    pub within_4se: bool,
}

impl SimulationReport {
    pub fn from_tally(t: &Tally, seed: u64) -> Self {
        let trials = t.trials();
        let max_tosses = t.counts.len() as u32 - 1;
        let (sum, sum_sq) = t.payoff_sums();
        let n = BigInt::from(trials);
        let sum = BigInt::from(sum);
        let sum_sq = BigInt::from(sum_sq);

        let mean = BigRational::new(sum.clone(), n.clone());
        let variance = if trials > 1 {
            BigRational::new(&n * sum_sq - &sum * &sum, &n * (&n - 1))
        } else {
            BigRational::zero()
        };
        let empirical_mean = mean.to_f64().unwrap_or(f64::INFINITY);
        let empirical_variance = variance.to_f64().unwrap_or(f64::INFINITY);
        let std_error = (empirical_variance / trials as f64).sqrt();
        let exact = BigRational::new(BigInt::from(max_tosses), BigInt::from(2));
        let exact_f = exact.to_f64().unwrap_or(f64::NAN);
        SimulationReport {
            trials,
            seed,
            max_tosses,
            empirical_mean,
            empirical_variance,
            std_error,
            ci95_low: empirical_mean - Z95 * std_error,
            ci95_high: empirical_mean + Z95 * std_error,
            exact_mean: crate::rational::format_ratio(&exact),
            within_4se: (empirical_mean - exact_f).abs() <= 4.0 * std_error,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("reports always serialize")
    }
}

/// Plays `trials` seeded games of at most `max_tosses` tosses.
pub fn simulate_truncated_game(
    max_tosses: u32,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    let t = tally(&SeededCoins::new(seed), max_tosses, trials)?;
    Ok(SimulationReport::from_tally(&t, seed))
}

/// Fraction of games whose first heads lands exactly on toss `k`.
pub fn simulate_position_frequency(k: u32, trials: u64, seed: u64) -> Result<f64> {
    position_frequency_with(&SeededCoins::new(seed), k, trials)
}

pub fn position_frequency_with<S: CoinSource>(source: &S, k: u32, trials: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    let t = tally(source, k, trials)?;
    Ok(t.counts[k as usize] as f64 / trials as f64)
}

/// Exact expectation of the game capped at `n` tosses, for `n = 1..=max_n`.
pub fn divergence_profile(max_n: u32) -> Result<Vec<(u32, BigRational)>> {
    if max_n == 0 {
        return Err(Error::invalid("max_n", "must be at least 1"));
    }
    let mut acc = BigRational::zero();
    Ok((1..=max_n)
        .map(|n| {
            acc += crate::game::position(n).expected_payoff;
            (n, acc.clone())
        })
        .collect())
}
