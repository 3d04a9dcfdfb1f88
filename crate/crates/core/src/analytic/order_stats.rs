//! Order statistics of i.i.d. Γ(M, β) samples.

use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use super::quadrature::integrate;
use crate::{Error, Result};

/// Tail mass cut from each side of the Γ(M, β) support before integrating.
pub const TAIL_MASS: f64 = 1e-12;

/// The `rank`-th smallest of `sample_size` draws from Γ(`shape`, `scale`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatSpec {
    pub shape: usize,
    pub scale: f64,
    pub sample_size: usize,
    /// 1 = smallest.
    pub rank: usize,
}

impl OrderStatSpec {
    pub fn validate(self) -> Result<Self> {
        if self.shape < 1 {
            return Err(Error::Domain("gamma shape must be at least 1".into()));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::Domain(format!(
                "gamma scale {} must be positive",
                self.scale
            )));
        }
        if self.rank < 1 || self.rank > self.sample_size {
            return Err(Error::Domain(format!(
                "rank {} outside 1..={}",
                self.rank, self.sample_size
            )));
        }
        Ok(self)
    }
}

pub fn gamma_ln_pdf(shape: f64, scale: f64, x: f64) -> f64 {
    (shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()
}

pub fn gamma_pdf(shape: f64, scale: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_ln_pdf(shape, scale, x).exp()
}

/// Quantile of Γ(shape, scale) by bisection. With `upper` the probability is
/// taken as a right-tail mass, which keeps precision for `p` near 1.
pub fn gamma_quantile(shape: f64, scale: f64, p: f64, upper: bool) -> f64 {
    let tail = |x: f64| {
        if upper {
            gamma_ur(shape, x / scale)
        } else {
            gamma_lr(shape, x / scale)
        }
    };
    // `below(x)` is true while x is still left of the quantile.
    let below = |x: f64| if upper { tail(x) > p } else { tail(x) < p };
    let mut lo = 0.0;
    let mut hi = shape * scale;
    while below(hi) {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Density of the order statistic at `x`; zero for `x <= 0`.
pub fn orderstat_pdf(spec: &OrderStatSpec, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let (m, b) = (spec.shape as f64, spec.scale);
    let (n, k) = (spec.sample_size, spec.rank);
    let below = k - 1;
    let above = n - k;
    let cdf = gamma_lr(m, x / b);
    let sf = gamma_ur(m, x / b);
    if (below > 0 && cdf <= 0.0) || (above > 0 && sf <= 0.0) {
        return 0.0;
    }
    let ln_comb = ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64) - ln_gamma(above as f64 + 1.0);
    let mut ln = ln_comb + gamma_ln_pdf(m, b, x);
    if below > 0 {
        ln += below as f64 * cdf.ln();
    }
    if above > 0 {
        ln += above as f64 * sf.ln();
    }
    ln.exp()
}

/// Integration window carrying all but `2 · TAIL_MASS` of the parent gamma.
pub fn support(shape: usize, scale: f64) -> (f64, f64) {
    let m = shape as f64;
    (
        gamma_quantile(m, scale, TAIL_MASS, false),
        gamma_quantile(m, scale, TAIL_MASS, true),
    )
}

/// Generic `∫ g(x) f_(k)(x) dx` over the truncated support.
pub fn orderstat_expectation<G: Fn(f64) -> f64>(spec: &OrderStatSpec, g: G) -> Result<f64> {
    let spec = spec.validate()?;
    let (lo, hi) = support(spec.shape, spec.scale);
    Ok(integrate(
        |x| g(x) * orderstat_pdf(&spec, x),
        lo,
        hi,
        32,
        1e-10,
        1e-6,
        2000,
    )?
    .value)
}

/// `E[1 / X_(k)] = ∫ f_(k)(x) / x dx`.
pub fn inverse_moment_integral(spec: &OrderStatSpec) -> Result<f64> {
    let spec = spec.validate()?;
    if spec.shape < 2 {
        return Err(Error::Domain("inverse moment needs shape >= 2".into()));
    }
    orderstat_expectation(&spec, |x| 1.0 / x)
}
