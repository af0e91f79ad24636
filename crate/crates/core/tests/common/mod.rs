#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use relnet::Plan;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Rational in `[-5, 5]` with a denominator between 1 and 6.
pub fn random_net(rng: &mut ChaCha8Rng) -> BigRational {
    let d = rng.gen_range(1..=6);
    q(rng.gen_range(-5 * d..=5 * d), d)
}

pub fn random_plan(rng: &mut ChaCha8Rng, max_len: usize) -> Plan {
    let len = rng.gen_range(0..=max_len);
    let deltas: Vec<BigRational> = (0..len).map(|_| random_net(rng)).collect();
    Plan::from_net_utilities(&deltas)
}
