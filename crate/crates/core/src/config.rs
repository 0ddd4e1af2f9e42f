//! Size and effort gates.

use crate::error::{Error, Result};

pub const BUDGET_ENV: &str = "KLEINCL_BUDGET";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum length of any enumerated subspace list.
    pub max_objects: u128,
    /// Largest geometry order `q^t` for which the exact image check runs
    /// unless explicitly requested.
    pub exact_image_max_q: u32,
    /// Node limit for the exhaustive search.
    pub max_search_nodes: u64,
    /// Trial limit for randomized constructions.
    pub max_trials: u64,
    /// Scale factor applied to the default gates, 1 unless overridden.
    pub factor: u64,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget {
            max_objects: 200_000,
            exact_image_max_q: 4,
            max_search_nodes: 200_000_000,
            max_trials: 10_000,
            factor: 1,
        }
    }
}

impl Budget {
    /// Default gates multiplied by `factor`.
    pub fn scaled(factor: u64) -> Budget {
        let d = Budget::default();
        let factor = factor.max(1);
        Budget {
            max_objects: d.max_objects * factor as u128,
            exact_image_max_q: d.exact_image_max_q.saturating_mul(factor.min(u32::MAX as u64) as u32),
            max_search_nodes: d.max_search_nodes.saturating_mul(factor),
            max_trials: d.max_trials.saturating_mul(factor),
            factor,
        }
    }

    /// Reads the `KLEINCL_BUDGET` scale factor, if set.
    pub fn from_env() -> Result<Budget> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => {
                let factor: u64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Precondition(format!("{BUDGET_ENV}={v:?} is not a positive integer")))?;
                if factor == 0 {
                    return Err(Error::Precondition(format!("{BUDGET_ENV} must be positive")));
                }
                Ok(Budget::scaled(factor))
            }
            Err(_) => Ok(Budget::default()),
        }
    }
}
