use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One side of the bipartition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    A,
    B,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::A => Factor::B,
            Factor::B => Factor::A,
        }
    }
}

impl std::fmt::Display for Factor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Factor::A => write!(f, "A"),
            Factor::B => write!(f, "B"),
        }
    }
}

impl std::str::FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Factor::A),
            "B" | "b" => Ok(Factor::B),
            other => Err(Error::InvalidInput(format!("unknown factor `{other}`"))),
        }
    }
}

/// The cut `H = H_A ⊗ H_B` with `d = d_a · d_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDims")]
pub struct BipartiteDims {
    d_a: usize,
    d_b: usize,
    d: usize,
}

#[derive(Deserialize)]
struct RawDims {
    d_a: usize,
    d_b: usize,
}

impl TryFrom<RawDims> for BipartiteDims {
    type Error = Error;

    fn try_from(raw: RawDims) -> Result<Self> {
        Self::new(raw.d_a, raw.d_b)
    }
}

impl BipartiteDims {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidInput(format!(
                "factor dimensions must be positive, got ({d_a}, {d_b})"
            )));
        }
        let d = d_a
            .checked_mul(d_b)
            .ok_or_else(|| Error::InvalidInput("total dimension overflows".into()))?;
        Ok(Self { d_a, d_b, d })
    }

    /// Cut of an `n_sites` qubit chain after the first `n_sites_a` sites.
    pub fn qubits(n_sites_a: usize, n_sites_b: usize) -> Result<Self> {
        if n_sites_a + n_sites_b >= usize::BITS as usize {
            return Err(Error::InvalidInput("too many qubits".into()));
        }
        Self::new(1 << n_sites_a, 1 << n_sites_b)
    }

    /// Cut of a `d`-dimensional space with factor A of dimension `d_a`.
    pub fn split(d: usize, d_a: usize) -> Result<Self> {
        if d_a == 0 || !d.is_multiple_of(d_a) {
            return Err(Error::InvalidInput(format!(
                "cut d_a = {d_a} does not divide total dimension {d}"
            )));
        }
        Self::new(d_a, d / d_a)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d_min(&self) -> usize {
        self.d_a.min(self.d_b)
    }

    pub fn d_max(&self) -> usize {
        self.d_a.max(self.d_b)
    }

    /// Asymmetry ratio `d_max / d_min`.
    pub fn lambda(&self) -> f64 {
        self.d_max() as f64 / self.d_min() as f64
    }

    pub fn dim(&self, factor: Factor) -> usize {
        match factor {
            Factor::A => self.d_a,
            Factor::B => self.d_b,
        }
    }

    /// The factor with the smaller dimension (A on ties).
    pub fn smaller_factor(&self) -> Factor {
        if self.d_a <= self.d_b {
            Factor::A
        } else {
            Factor::B
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.d_a == self.d_b
    }

    /// The same space with the roles of A and B exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            d_a: self.d_b,
            d_b: self.d_a,
            d: self.d,
        }
    }
}

impl std::fmt::Display for BipartiteDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}⊗{}", self.d_a, self.d_b)
    }
}
