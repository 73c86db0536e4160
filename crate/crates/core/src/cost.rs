use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Algorithm-visible work units: full encoder passes, entropy (rate)
/// evaluations and decoder passes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cost {
    pub encoder_runs: u64,
    pub entropy_evals: u64,
    pub decoder_runs: u64,
}

impl Cost {
    pub const ZERO: Cost = Cost {
        encoder_runs: 0,
        entropy_evals: 0,
        decoder_runs: 0,
    };

    pub fn encoder() -> Self {
        Cost {
            encoder_runs: 1,
            ..Cost::ZERO
        }
    }

    pub fn entropy() -> Self {
        Cost {
            entropy_evals: 1,
            ..Cost::ZERO
        }
    }

    pub fn decoder() -> Self {
        Cost {
            decoder_runs: 1,
            ..Cost::ZERO
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        Cost {
            encoder_runs: self.encoder_runs + rhs.encoder_runs,
            entropy_evals: self.entropy_evals + rhs.entropy_evals,
            decoder_runs: self.decoder_runs + rhs.decoder_runs,
        }
    }
}

impl AddAssign for Cost {
    fn add_assign(&mut self, rhs: Cost) {
        *self = *self + rhs;
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}
