//! Scalar operation counting for decoder complexity comparisons.
//!
//! Convention: every scalar addition/subtraction, multiplication/division,
//! comparison (including abs, min, max and sign tests) and transcendental
//! evaluation (exp, log, log1p, tanh) counts as one operation. Data movement
//! and random number generation are free.

use serde::Serialize;

/// Sink for operation counts. The unit type is the no-op sink used by the
/// uninstrumented decoders, so counting compiles away.
pub trait Ops {
    fn add(&mut self, n: usize);
    fn mul(&mut self, n: usize);
    fn cmp(&mut self, n: usize);
    fn exp_log(&mut self, n: usize);

    /// `n` element-wise [`crate::decoders::lse`] evaluations: two sign tests,
    /// one sign comparison, two abs and one min, two sums, two abs, a multiply,
    /// two exp, two log1p and two final adds.
    fn lse(&mut self, n: usize) {
        self.cmp(8 * n);
        self.add(4 * n);
        self.mul(n);
        self.exp_log(4 * n);
    }
}

impl Ops for () {
    #[inline]
    fn add(&mut self, _: usize) {}
    #[inline]
    fn mul(&mut self, _: usize) {}
    #[inline]
    fn cmp(&mut self, _: usize) {}
    #[inline]
    fn exp_log(&mut self, _: usize) {}
    #[inline]
    fn lse(&mut self, _: usize) {}
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCounter {
    pub add: u64,
    pub mul: u64,
    pub cmp: u64,
    pub exp_log: u64,
}

impl OpCounter {
    pub fn total(&self) -> u64 {
        self.add + self.mul + self.cmp + self.exp_log
    }
}

impl Ops for OpCounter {
    fn add(&mut self, n: usize) {
        self.add += n as u64;
    }
    fn mul(&mut self, n: usize) {
        self.mul += n as u64;
    }
    fn cmp(&mut self, n: usize) {
        self.cmp += n as u64;
    }
    fn exp_log(&mut self, n: usize) {
        self.exp_log += n as u64;
    }
}

impl std::ops::Add for OpCounter {
    type Output = OpCounter;
    fn add(self, o: OpCounter) -> OpCounter {
        OpCounter {
            add: self.add + o.add,
            mul: self.mul + o.mul,
            cmp: self.cmp + o.cmp,
            exp_log: self.exp_log + o.exp_log,
        }
    }
}
