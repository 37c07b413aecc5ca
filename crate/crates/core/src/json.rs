//! Shared JSON shapes.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::INF;

/// Exact rational `num / den` with `den > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl From<Ratio<i64>> for Rational {
    fn from(r: Ratio<i64>) -> Self {
        Rational {
            num: *r.numer(),
            den: *r.denom(),
        }
    }
}

impl TryFrom<Rational> for Ratio<i64> {
    type Error = Error;

    fn try_from(r: Rational) -> Result<Self> {
        if r.den <= 0 {
            return Err(Error::Parse(format!("bad denominator {}", r.den)));
        }
        Ok(Ratio::new(r.num, r.den))
    }
}

/// `None` stands for an unbounded window.
pub fn bound_to_json(h: i64) -> Option<i64> {
    (h < INF).then_some(h)
}

pub fn bound_from_json(h: Option<i64>) -> i64 {
    h.unwrap_or(INF)
}
