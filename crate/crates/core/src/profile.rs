use alloc::vec::Vec;

use crate::scale::Scale;

/// A function of a [`Scale`] argument, stored as a table over `0..steps.len()`
/// that stays constant past the last entry, plus a separate value at `∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile<T> {
    steps: Vec<T>,
    at_infinity: T,
}

impl<T: Copy> Profile<T> {
    /// `steps` must be nonempty.
    pub fn new(steps: Vec<T>, at_infinity: T) -> Self {
        assert!(!steps.is_empty(), "profile needs at least one step");
        Profile { steps, at_infinity }
    }

    pub fn at(&self, n: Scale) -> T {
        match n {
            Scale::Finite(k) => {
                let i = (k as usize).min(self.steps.len() - 1);
                self.steps[i]
            }
            Scale::Infinite => self.at_infinity,
        }
    }

    pub fn at_finite(&self, n: u64) -> T {
        self.at(Scale::Finite(n))
    }

    pub fn steps(&self) -> &[T] {
        &self.steps
    }

    pub fn at_infinity(&self) -> T {
        self.at_infinity
    }
}

impl<T: Copy + PartialOrd> Profile<T> {
    pub fn is_monotone_nondecreasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[0] <= w[1])
            && self.steps.last().is_some_and(|l| *l <= self.at_infinity)
    }

    pub fn is_monotone_nonincreasing(&self) -> bool {
        self.steps.windows(2).all(|w| w[0] >= w[1])
            && self.steps.last().is_some_and(|l| *l >= self.at_infinity)
    }
}

impl Profile<Scale> {
    /// True when every finite argument has a finite value.
    pub fn finite_on_finite_scales(&self) -> bool {
        self.steps.iter().all(|s| s.is_finite())
    }
}
