//! Component-code fixtures and the product/staircase code structures built
//! on them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bch::BchCode;
use crate::error::{Error, Result};

/// Parameters of a BCH/eBCH component code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub v: u32,
    pub t: usize,
    pub s: usize,
    pub extended: bool,
}

impl CodeParams {
    pub fn build(&self) -> Result<BchCode> {
        BchCode::new(self.v, self.t, self.s, self.extended)
    }

    /// Parameters of an existing code.
    pub fn of(code: &BchCode) -> Self {
        Self {
            v: code.order_exponent(),
            t: code.t(),
            s: code.shortening(),
            extended: code.is_extended(),
        }
    }

    /// Length of the code these parameters produce, without building it.
    pub fn n(&self) -> usize {
        (1usize << self.v) - 1 - self.s + self.extended as usize
    }

    /// The same code, shortened by one more bit when its length is odd.
    pub fn even_length(self) -> Self {
        if self.n() % 2 == 1 {
            Self { s: self.s + 1, ..self }
        } else {
            self
        }
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bch(v={},t={},s={},ext={})",
            self.v, self.t, self.s, self.extended
        )
    }
}

impl FromStr for CodeParams {
    type Err = Error;
    /// Parses the [`fmt::Display`] form, `bch(v=8,t=3,s=0,ext=false)`.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse code `{text}`"));
        let body = text
            .trim()
            .strip_prefix("bch(")
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(bad)?;
        let mut p = Self { v: 0, t: 0, s: 0, extended: false };
        for field in body.split(',') {
            let (key, val) = field.split_once('=').ok_or_else(bad)?;
            let val = val.trim();
            match key.trim() {
                "v" => p.v = val.parse().map_err(|_| bad())?,
                "t" => p.t = val.parse().map_err(|_| bad())?,
                "s" => p.s = val.parse().map_err(|_| bad())?,
                "ext" => p.extended = val.parse().map_err(|_| bad())?,
                _ => return Err(bad()),
            }
        }
        if p.v == 0 || p.t == 0 {
            return Err(bad());
        }
        Ok(p)
    }
}

/// A fixture id (`C1`..`C3`, adapted to `structure`) or a `bch(...)` label.
pub fn resolve_code(text: &str, structure: Structure) -> Result<CodeParams> {
    match text.parse::<CodeId>() {
        Ok(id) => Ok(id.params_for(structure)),
        Err(_) => text.parse(),
    }
}

/// Which product-like structure a component code is used in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Pc,
    Scc,
}

impl FromStr for Structure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pc" | "product" => Ok(Self::Pc),
            "scc" | "staircase" => Ok(Self::Scc),
            other => Err(Error::Config(format!("unknown structure `{other}`"))),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pc => "pc",
            Self::Scc => "scc",
        })
    }
}

/// The three reference component codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CodeId {
    C1,
    C2,
    C3,
}

/// Row of the reference code table, including the Shannon limits (Eb/N0 in
/// dB on the bi-AWGN channel) that plots use as markers.
#[derive(Clone, Copy, Debug)]
pub struct FixtureRow {
    pub id: CodeId,
    pub params: CodeParams,
    pub pc_rate: f64,
    pub pc_hd_limit_db: f64,
    pub pc_sd_limit_db: f64,
    pub scc_rate: f64,
    pub scc_hd_limit_db: f64,
    pub scc_sd_limit_db: f64,
}

pub const FIXTURES: [FixtureRow; 3] = [
    FixtureRow {
        id: CodeId::C1,
        params: CodeParams { v: 8, t: 2, s: 0, extended: true },
        pc_rate: 0.871,
        pc_hd_limit_db: 4.05,
        pc_sd_limit_db: 2.64,
        scc_rate: 0.867,
        scc_hd_limit_db: 3.99,
        scc_sd_limit_db: 2.74,
    },
    FixtureRow {
        id: CodeId::C2,
        params: CodeParams { v: 8, t: 3, s: 0, extended: false },
        pc_rate: 0.820,
        pc_hd_limit_db: 3.54,
        pc_sd_limit_db: 2.23,
        scc_rate: 0.811,
        scc_hd_limit_db: 3.46,
        scc_sd_limit_db: 2.14,
    },
    FixtureRow {
        id: CodeId::C3,
        params: CodeParams { v: 9, t: 3, s: 0, extended: false },
        pc_rate: 0.897,
        pc_hd_limit_db: 4.36,
        pc_sd_limit_db: 3.15,
        scc_rate: 0.894,
        scc_hd_limit_db: 4.32,
        scc_sd_limit_db: 3.11,
    },
];

impl CodeId {
    pub fn fixture(self) -> &'static FixtureRow {
        FIXTURES.iter().find(|f| f.id == self).unwrap()
    }

    pub fn params(self) -> CodeParams {
        self.fixture().params
    }

    /// Component parameters for a structure: staircase codes need an even
    /// component length, obtained by one extra bit of shortening.
    pub fn params_for(self, structure: Structure) -> CodeParams {
        match structure {
            Structure::Pc => self.params(),
            Structure::Scc => self.params().even_length(),
        }
    }
}

impl FromStr for CodeId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "C1" => Ok(Self::C1),
            "C2" => Ok(Self::C2),
            "C3" => Ok(Self::C3),
            other => Err(Error::Config(format!("unknown code fixture `{other}`"))),
        }
    }
}

impl fmt::Display for CodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Rate of a product code with `(n, k)` components: `k^2 / n^2`.
pub fn pc_rate(code: &BchCode) -> f64 {
    let r = code.rate();
    r * r
}

/// Rate of a staircase code with `(n, k)` components: `1 - 2(n-k)/n`.
pub fn scc_rate(code: &BchCode) -> f64 {
    1.0 - 2.0 * (code.n() - code.k()) as f64 / code.n() as f64
}
