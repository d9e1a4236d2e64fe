use std::fmt;

use crate::error::{Error, Result};

/// One of the four real normed division algebras, identified by its real
/// dimension `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AlgebraDim {
    Real,
    Complex,
    Quaternion,
    Octonion,
}

impl AlgebraDim {
    pub const ALL: [AlgebraDim; 4] =
        [AlgebraDim::Real, AlgebraDim::Complex, AlgebraDim::Quaternion, AlgebraDim::Octonion];

    /// The three associative algebras, for which matrices can be sampled and
    /// diagonalised.
    pub const ASSOCIATIVE: [AlgebraDim; 3] = [AlgebraDim::Real, AlgebraDim::Complex, AlgebraDim::Quaternion];

    pub fn from_beta(beta: u32) -> Result<Self> {
        match beta {
            1 => Ok(AlgebraDim::Real),
            2 => Ok(AlgebraDim::Complex),
            4 => Ok(AlgebraDim::Quaternion),
            8 => Ok(AlgebraDim::Octonion),
            other => Err(Error::Parameter(format!("beta must be one of 1, 2, 4, 8 (got {other})"))),
        }
    }

    pub fn beta(self) -> u32 {
        match self {
            AlgebraDim::Real => 1,
            AlgebraDim::Complex => 2,
            AlgebraDim::Quaternion => 4,
            AlgebraDim::Octonion => 8,
        }
    }

    #[inline]
    pub fn beta_f64(self) -> f64 {
        self.beta() as f64
    }

    /// Jack parameter `alpha = 2 / beta`.
    #[inline]
    pub fn alpha(self) -> f64 {
        2.0 / self.beta_f64()
    }

    pub fn is_associative(self) -> bool {
        self != AlgebraDim::Octonion
    }

    /// Real dimension of the space of `m x m` Hermitian matrices over the algebra.
    pub fn hermitian_dim(self, m: usize) -> f64 {
        let m = m as f64;
        m + self.beta_f64() * m * (m - 1.0) / 2.0
    }
}

impl fmt::Display for AlgebraDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "beta={}", self.beta())
    }
}

impl TryFrom<u32> for AlgebraDim {
    type Error = Error;

    fn try_from(beta: u32) -> Result<Self> {
        AlgebraDim::from_beta(beta)
    }
}
