//! Exact-rational replay of the published walkthroughs and result tables.

pub mod rational;
pub mod tables;
pub mod trace;

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Signature,
    Subliminal,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Signature => "signature",
            Scheme::Subliminal => "subliminal",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "signature" => Ok(Scheme::Signature),
            "subliminal" => Ok(Scheme::Subliminal),
            other => Err(crate::Error::InvalidParameter(format!("unknown scheme {other:?}"))),
        }
    }
}
