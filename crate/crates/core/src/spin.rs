use alloc::vec::Vec;
use core::ops::Index;

use rand::Rng as _;

use crate::error::{param, Result};
use crate::rng::Rng;

/// A ±1 assignment per vertex. `+1` marks membership in `S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(param(alloc::format!("spin value {bad} is not ±1")));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(alloc::vec![1; n])
    }

    /// I.i.d. uniform ±1 spins.
    pub fn random(n: usize, rng: &mut Rng) -> Self {
        Self((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

impl Index<usize> for SpinConfig {
    type Output = i8;

    fn index(&self, i: usize) -> &i8 {
        &self.0[i]
    }
}

impl From<SpinConfig> for Vec<i8> {
    fn from(s: SpinConfig) -> Self {
        s.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_spin_values() {
        assert!(SpinConfig::new(alloc::vec![1, 0, -1]).is_err());
        assert!(SpinConfig::new(alloc::vec![1, -1]).is_ok());
    }
}
