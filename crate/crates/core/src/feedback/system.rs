use crate::error::{Error, Result};
use crate::model::RbfNetwork;

/// A scalar nonlinearity closing the loop.
pub trait ScalarMap {
    fn apply(&self, x: f64) -> f64;
}

impl ScalarMap for RbfNetwork {
    fn apply(&self, x: f64) -> f64 {
        self.eval(x)
    }
}

impl<T: ScalarMap + ?Sized> ScalarMap for &T {
    fn apply(&self, x: f64) -> f64 {
        (**self).apply(x)
    }
}

impl<T: ScalarMap + ?Sized> ScalarMap for Box<T> {
    fn apply(&self, x: f64) -> f64 {
        (**self).apply(x)
    }
}

/// `f(x) = slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMap(pub f64);

impl ScalarMap for LinearMap {
    fn apply(&self, x: f64) -> f64 {
        self.0 * x
    }
}

/// Wraps any closure.
pub struct FnMap<F>(pub F);

impl<F: Fn(f64) -> f64> ScalarMap for FnMap<F> {
    fn apply(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

/// Two-tap low-pass `H(z) = b1 + b2 z^-1`: `b1` weighs the newest map
/// output, `b2` the one before it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirFilter {
    pub b1: f64,
    pub b2: f64,
}

impl FirFilter {
    pub fn new(b1: f64, b2: f64) -> Result<Self> {
        if !b1.is_finite() || !b2.is_finite() {
            return Err(Error::invalid("filter coefficients must be finite"));
        }
        Ok(Self { b1, b2 })
    }

    /// The pass-through filter used when the loop has no low-pass stage.
    pub const IDENTITY: FirFilter = FirFilter { b1: 1.0, b2: 0.0 };

    pub fn kernel(&self) -> [f64; 2] {
        [self.b1, self.b2]
    }
}

/// Delay line of `delay` samples, optional low-pass, and a map `f` feeding
/// back into the line.
#[derive(Debug, Clone)]
pub struct FeedbackSystem<M> {
    delay: usize,
    filter: Option<FirFilter>,
    map: M,
}

impl<M: ScalarMap> FeedbackSystem<M> {
    pub fn new(delay: usize, filter: Option<FirFilter>, map: M) -> Result<Self> {
        if delay == 0 {
            return Err(Error::invalid("delay length must be at least 1"));
        }
        if let Some(f) = filter {
            FirFilter::new(f.b1, f.b2)?;
        }
        Ok(Self { delay, filter, map })
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn filter(&self) -> Option<FirFilter> {
        self.filter
    }

    pub fn map(&self) -> &M {
        &self.map
    }

    pub(crate) fn taps(&self) -> FirFilter {
        self.filter.unwrap_or(FirFilter::IDENTITY)
    }

    pub(crate) fn check_state(&self, s: &LoopState) -> Result<()> {
        if s.x.len() != self.delay + 1 {
            return Err(Error::invalid(format!("state has {} entries, loop needs {}", s.x.len(), self.delay + 1)));
        }
        Ok(())
    }

    /// One transition; returns the next state and the map output `f(x_L)`.
    ///
    /// ```text
    /// x0' = f(xL)
    /// x1' = b1 f(xL) + b2 x0
    /// xk' = x(k-1),  k >= 2
    /// ```
    /// Without a filter this reduces to `v(n) = f(v(n - L))`.
    pub fn step(&self, s: &LoopState) -> Result<(LoopState, f64)> {
        self.check_state(s)?;
        let mut next = s.clone();
        let out = self.advance(&mut next, self.taps(), 0.0);
        Ok((next, out))
    }

    pub(crate) fn advance(&self, s: &mut LoopState, taps: FirFilter, input_noise: f64) -> f64 {
        let l = self.delay;
        let out = self.map.apply(s.x[l] + input_noise);
        let previous = s.x[0];
        s.x.copy_within(1..l, 2);
        s.x[1] = taps.b1 * out + taps.b2 * previous;
        s.x[0] = out;
        out
    }
}

/// Global loop state `[x0, x1, ..., xL]`: `x0` is the previous map output,
/// `x1..xL` the delay line, `xL` being the next sample fed to the map.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopState {
    x: Vec<f64>,
}

impl LoopState {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::invalid("loop state needs at least two entries"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("loop state must be finite"));
        }
        Ok(Self { x })
    }

    pub fn zeros(delay: usize) -> Self {
        Self { x: vec![0.0; delay + 1] }
    }

    /// Delay line loaded with `samples` in playback order (`samples[0]` is
    /// fed to the map first); `x0` starts at zero.
    pub fn from_delay_line(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("delay line content cannot be empty"));
        }
        let mut x = vec![0.0];
        x.extend(samples.iter().rev());
        Self::new(x)
    }

    /// Initialization with the first half of a `2L` period.
    pub fn from_half_period(period: &[f64]) -> Result<Self> {
        if period.len() < 2 || !period.len().is_multiple_of(2) {
            return Err(Error::invalid("period length must be even and at least 2"));
        }
        Self::from_delay_line(&period[..period.len() / 2])
    }

    /// The exact state of the loop on the `2L`-periodic orbit whose next map
    /// output is `period[L]`.
    pub fn on_orbit(period: &[f64], filter: Option<FirFilter>) -> Result<Self> {
        if period.len() < 2 || !period.len().is_multiple_of(2) {
            return Err(Error::invalid("period length must be even and at least 2"));
        }
        let n2 = period.len();
        let l = n2 / 2;
        let h = filter.unwrap_or(FirFilter::IDENTITY);
        let input = |n: usize| h.b1 * period[n % n2] + h.b2 * period[(n + n2 - 1) % n2];
        let mut x = vec![0.0; l + 1];
        x[0] = period[l - 1];
        for j in 0..l {
            x[l - j] = input(j);
        }
        Self::new(x)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }

    pub fn delay_line(&self) -> &[f64] {
        &self.x[1..]
    }
}
