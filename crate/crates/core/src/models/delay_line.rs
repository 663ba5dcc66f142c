use alloc::vec::Vec;

/// State recorded once per integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub ws: f64,
    pub q: f64,
    pub p: f64,
    pub r: f64,
}

/// Fixed-capacity ring of past samples at constant `dt` spacing.
///
/// Lag 0 is the most recent sample. Lags beyond the stored history return
/// the oldest sample, which is how the pre-filled initial condition is read.
#[derive(Debug, Clone)]
pub struct DelayLine {
    buf: Vec<Sample>,
    head: usize,
}

impl DelayLine {
    /// Ring holding `capacity` samples, all initialised to `fill`.
    pub fn new(capacity: usize, fill: Sample) -> Self {
        let capacity = capacity.max(1);
        DelayLine {
            buf: alloc::vec![fill; capacity],
            head: capacity - 1,
        }
    }

    pub fn capacity(&self) -> usize {
        self.buf.len()
    }

    pub fn push(&mut self, s: Sample) {
        self.head += 1;
        if self.head == self.buf.len() {
            self.head = 0;
        }
        self.buf[self.head] = s;
    }

    pub fn latest(&self) -> &Sample {
        &self.buf[self.head]
    }

    /// Sample pushed `lag` steps before the latest one.
    pub fn lagged(&self, lag: usize) -> &Sample {
        let cap = self.buf.len();
        let lag = lag.min(cap - 1);
        let idx = (self.head + cap - lag) % cap;
        &self.buf[idx]
    }

    /// Overwrites every slot with `s`.
    pub fn fill(&mut self, s: Sample) {
        self.buf.iter_mut().for_each(|x| *x = s);
    }
}
