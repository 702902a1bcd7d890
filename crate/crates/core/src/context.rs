use crate::error::{QError, QResult};

/// The fixed prime `p` together with the divided-power degree budget.
///
/// Every operation of the kernel is parameterized by a `Context`. Values are
/// immutable and `Copy`, so a context can be shared freely across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Context {
    p: u32,
    degree_budget: usize,
}

impl Context {
    pub const DEFAULT_DEGREE_BUDGET: usize = 32;

    /// Creates a context for the prime `p` with the default degree budget.
    pub fn new(p: u32) -> QResult<Self> {
        Self::with_budget(p, Self::DEFAULT_DEGREE_BUDGET)
    }

    /// Creates a context with an explicit divided-power degree budget.
    pub fn with_budget(p: u32, degree_budget: usize) -> QResult<Self> {
        if !is_prime(p) {
            return Err(QError::NotPrime(p));
        }
        Ok(Context { p, degree_budget })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree_budget(&self) -> usize {
        self.degree_budget
    }

    /// Fails with `BudgetExceeded` if a divided-power index would overrun the budget.
    pub fn check_budget(&self, index: usize) -> QResult<()> {
        if index > self.degree_budget {
            Err(QError::BudgetExceeded {
                index,
                budget: self.degree_budget,
            })
        } else {
            Ok(())
        }
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_primes_rejects_composites() {
        for p in [2u32, 3, 5, 7, 11, 13] {
            assert!(Context::new(p).is_ok());
        }
        for n in [0u32, 1, 4, 6, 9, 15, 21] {
            assert_eq!(Context::new(n), Err(QError::NotPrime(n)));
        }
    }

    #[test]
    fn budget_check() {
        let ctx = Context::with_budget(2, 8).unwrap();
        assert!(ctx.check_budget(8).is_ok());
        assert_eq!(
            ctx.check_budget(9),
            Err(QError::BudgetExceeded { index: 9, budget: 8 })
        );
    }
}
