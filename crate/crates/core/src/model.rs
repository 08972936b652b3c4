//! One-input one-output radial basis function network
//! `f(x) = b + sum_i w_i phi(x, m_i)` and its analytic derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial function shape.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasisKind {
    /// `|x - m|^3`. Only C^2, so derivatives up to order 2.
    #[default]
    Cubic,
    /// `exp(-(x - m)^2 / width^2)`, smooth to any order.
    Gaussian { width: f64 },
}

impl BasisKind {
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::invalid(format!("gaussian width must be positive, got {width}")));
        }
        Ok(BasisKind::Gaussian { width })
    }

    /// Highest derivative order this basis can represent; `None` means unbounded.
    pub fn max_order(&self) -> Option<usize> {
        match self {
            BasisKind::Cubic => Some(2),
            BasisKind::Gaussian { .. } => None,
        }
    }

    pub fn supports(&self, order: usize) -> bool {
        self.max_order().is_none_or(|m| order <= m)
    }

    pub fn check_order(&self, order: usize) -> Result<()> {
        if self.supports(order) {
            Ok(())
        } else {
            Err(Error::UnsupportedOrder { basis: self.name(), order })
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BasisKind::Cubic => "cubic",
            BasisKind::Gaussian { .. } => "gaussian",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            BasisKind::Cubic => Ok(()),
            BasisKind::Gaussian { width } => BasisKind::gaussian(width).map(|_| ()),
        }
    }
}

/// `d^order / dx^order phi(x, m)`.
pub fn basis_value(kind: BasisKind, x: f64, m: f64, order: usize) -> Result<f64> {
    kind.check_order(order)?;
    Ok(basis_value_unchecked(kind, x, m, order))
}

pub(crate) fn basis_value_unchecked(kind: BasisKind, x: f64, m: f64, order: usize) -> f64 {
    match kind {
        BasisKind::Cubic => {
            let r = x - m;
            match order {
                0 => r.abs().powi(3),
                1 => 3.0 * r * r.abs(),
                2 => 6.0 * r.abs(),
                _ => unreachable!("cubic order checked by caller"),
            }
        }
        BasisKind::Gaussian { width } => {
            // d^n/dx^n exp(-s^2) with s = (x - m) / width equals
            // (-1)^n H_n(s) exp(-s^2) / width^n, H_n physicists' Hermite.
            let s = (x - m) / width;
            let mut h_prev = 1.0;
            let mut h = 2.0 * s;
            let hermite = match order {
                0 => 1.0,
                _ => {
                    for n in 1..order {
                        let next = 2.0 * s * h - 2.0 * n as f64 * h_prev;
                        h_prev = h;
                        h = next;
                    }
                    h
                }
            };
            let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * hermite * (-s * s).exp() / width.powi(order as i32)
        }
    }
}

/// A trained (or hand-built) network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNetwork")]
pub struct RbfNetwork {
    basis: BasisKind,
    centers: Vec<f64>,
    weights: Vec<f64>,
    bias: f64,
    trained_order: usize,
}

#[derive(Deserialize)]
struct RawNetwork {
    basis: BasisKind,
    centers: Vec<f64>,
    weights: Vec<f64>,
    bias: f64,
    trained_order: usize,
}

impl TryFrom<RawNetwork> for RbfNetwork {
    type Error = Error;
    fn try_from(raw: RawNetwork) -> Result<Self> {
        RbfNetwork::new(raw.basis, raw.centers, raw.weights, raw.bias, raw.trained_order)
    }
}

impl RbfNetwork {
    pub fn new(
        basis: BasisKind,
        centers: Vec<f64>,
        weights: Vec<f64>,
        bias: f64,
        trained_order: usize,
    ) -> Result<Self> {
        basis.validate()?;
        if centers.len() != weights.len() {
            return Err(Error::invalid(format!("{} centers but {} weights", centers.len(), weights.len())));
        }
        if centers.iter().chain(&weights).any(|v| !v.is_finite()) || !bias.is_finite() {
            return Err(Error::invalid("network parameters must be finite"));
        }
        basis.check_order(trained_order)?;
        Ok(Self { basis, centers, weights, bias, trained_order })
    }

    /// Network with no radial units.
    pub fn constant(bias: f64) -> Self {
        Self { basis: BasisKind::Cubic, centers: Vec::new(), weights: Vec::new(), bias, trained_order: 0 }
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn trained_order(&self) -> usize {
        self.trained_order
    }

    pub fn units(&self) -> usize {
        self.centers.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.bias + self.weighted_sum(x, 0)
    }

    /// Derivative of the given order; order 0 is `eval`. The bias drops out
    /// for every order >= 1.
    pub fn eval_derivative(&self, x: f64, order: usize) -> Result<f64> {
        self.basis.check_order(order)?;
        Ok(if order == 0 { self.eval(x) } else { self.weighted_sum(x, order) })
    }

    fn weighted_sum(&self, x: f64, order: usize) -> f64 {
        self.centers.iter().zip(&self.weights).map(|(&m, &w)| w * basis_value_unchecked(self.basis, x, m, order)).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
