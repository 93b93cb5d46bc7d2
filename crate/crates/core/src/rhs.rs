//! The nonlocal delayed right-hand side and its Galerkin projection.
//!
//! Both model variants share the pipeline
//!
//! ```text
//! history ──(delay: point eval or kernel average)──▶ w(y) = b(u(past, y))
//!        ──(spatial convolution)──▶ (∫_Ω w(y) f(x−y) dy)
//!        ──(projection)──▶ coefficients ⟨F, e_k⟩
//! ```
//!
//! With `|b| ≤ C_b`, `|f| ≤ M_f`, and a kernel of L¹ mass at most `C_{ξ,1}`,
//! the projected field obeys the uniform bound
//!
//! ```text
//! ‖F(u_t)‖ ≤ M_f · |Ω|^{3/2} · C_b · C_{ξ,1}
//! ```
//!
//! independent of the state — the key constant behind every dissipativity
//! estimate downstream ([`uniform_bound`]).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::delay::{make_step_kernel, DelayLaw, EpsilonSequence};
use crate::error::{Error, Result};
use crate::history::HistorySegment;
use crate::math;
use crate::spectral::{Domain, SpectralBasis, SpectralField};

/// Pointwise reaction nonlinearity `b : R → R`, bounded with a known bound.
#[derive(Debug, Clone, PartialEq)]
pub enum Nonlinearity {
    /// `b ≡ 0` (turns the model into a linear heat equation).
    Zero,
    /// Nicholson blowfly birth rate `b(w) = p·w·e^{−w}` for `w ≥ 0`, clamped
    /// to 0 for `w < 0`. Raw `p·w·e^{−w}` is unbounded as `w → −∞`; the
    /// clamp keeps `b` bounded (`C_b = p/e`, attained at `w = 1`) and locally
    /// Lipschitz, and agrees with the meaningful range `w ≥ 0`.
    Nicholson { p: f64 },
    /// Piecewise-linear interpolation of tabulated `(w, b(w))` pairs,
    /// extended by its end values outside the table.
    Tabulated { ws: Vec<f64>, bs: Vec<f64> },
}

impl Nonlinearity {
    pub fn nicholson(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Invalid(format!(
                "nicholson rate must be positive and finite, got {p}"
            )));
        }
        Ok(Nonlinearity::Nicholson { p })
    }

    pub fn tabulated(ws: Vec<f64>, bs: Vec<f64>) -> Result<Self> {
        if ws.len() != bs.len() {
            return Err(Error::DimensionMismatch {
                expected: ws.len(),
                got: bs.len(),
            });
        }
        if ws.len() < 2 {
            return Err(Error::Invalid("table needs at least two points".into()));
        }
        for pair in ws.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::Invalid(
                    "table abscissae must be strictly increasing".into(),
                ));
            }
        }
        if ws.iter().chain(bs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("table entries must be finite".into()));
        }
        Ok(Nonlinearity::Tabulated { ws, bs })
    }

    /// Pointwise evaluation `b(w)`.
    pub fn eval(&self, w: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Nicholson { p } => {
                let w = math::max(w, 0.0);
                p * w * math::exp(-w)
            }
            Nonlinearity::Tabulated { ws, bs } => {
                if w <= ws[0] {
                    return bs[0];
                }
                if w >= ws[ws.len() - 1] {
                    return bs[bs.len() - 1];
                }
                let i = ws.partition_point(|x| *x <= w) - 1;
                let t = (w - ws[i]) / (ws[i + 1] - ws[i]);
                bs[i] + t * (bs[i + 1] - bs[i])
            }
        }
    }

    /// Global bound `C_b = sup |b|`.
    pub fn bound(&self) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Nicholson { p } => p / core::f64::consts::E,
            Nonlinearity::Tabulated { bs, .. } => {
                bs.iter().fold(0.0, |acc, b| math::max(acc, math::abs(*b)))
            }
        }
    }

    /// A global Lipschitz constant of `b` (for nicholson `|b′| ≤ p`,
    /// attained at `w = 0⁺`).
    pub fn lipschitz(&self) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Nicholson { p } => *p,
            Nonlinearity::Tabulated { ws, bs } => {
                let mut l: f64 = 0.0;
                for i in 0..ws.len() - 1 {
                    l = math::max(l, math::abs((bs[i + 1] - bs[i]) / (ws[i + 1] - ws[i])));
                }
                l
            }
        }
    }
}

/// Bounded spatial interaction kernel `f : Ω − Ω → R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialKernel {
    Constant { f0: f64 },
    /// Heat kernel `f(s) = (4πα)^{−1/2} e^{−s²/(4α)}`, truncated at the
    /// domain (no periodic wrap).
    Gaussian { alpha: f64 },
}

impl SpatialKernel {
    pub fn constant(f0: f64) -> Result<Self> {
        if !f0.is_finite() {
            return Err(Error::Invalid("constant kernel value must be finite".into()));
        }
        Ok(SpatialKernel::Constant { f0 })
    }

    pub fn gaussian(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Invalid(format!(
                "gaussian width must be positive and finite, got {alpha}"
            )));
        }
        Ok(SpatialKernel::Gaussian { alpha })
    }

    /// Pointwise value `f(s)`.
    pub fn value(&self, s: f64) -> f64 {
        match self {
            SpatialKernel::Constant { f0 } => *f0,
            SpatialKernel::Gaussian { alpha } => {
                math::exp(-s * s / (4.0 * alpha))
                    / math::sqrt(4.0 * core::f64::consts::PI * alpha)
            }
        }
    }

    /// Sup bound `M_f` on `Ω − Ω`.
    pub fn sup_bound(&self) -> f64 {
        match self {
            SpatialKernel::Constant { f0 } => math::abs(*f0),
            SpatialKernel::Gaussian { alpha } => {
                1.0 / math::sqrt(4.0 * core::f64::consts::PI * alpha)
            }
        }
    }

    /// Composite-trapezoid quadrature of `∫₀^L w(y) f(x−y) dy` at every grid
    /// node `x`. Direct `O(N_x²)` evaluation — cheap at desk scale and
    /// oracle-simple. The constant kernel is rank-one: `f₀ · (∫ w) · 𝟙`.
    pub fn convolve(&self, domain: &Domain, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != domain.grid_len() {
            return Err(Error::DimensionMismatch {
                expected: domain.grid_len(),
                got: w.len(),
            });
        }
        match self {
            SpatialKernel::Constant { f0 } => {
                let total = f0 * domain.trapezoid(w);
                Ok(vec![total; w.len()])
            }
            SpatialKernel::Gaussian { .. } => {
                let n = w.len();
                let h = domain.spacing();
                let mut out = vec![0.0; n];
                for (i, o) in out.iter_mut().enumerate() {
                    let x = domain.node(i);
                    let mut acc = 0.0;
                    for (j, wj) in w.iter().enumerate() {
                        let weight = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                        acc += weight * wj * self.value(x - domain.node(j));
                    }
                    *o = acc * h;
                }
                Ok(out)
            }
        }
    }
}

/// A projected right-hand side value together with the delay that produced
/// it (the delay is worth logging: it is the state-dependent quantity).
#[derive(Debug, Clone)]
pub struct RhsEval {
    pub field: SpectralField,
    pub eta: f64,
}

fn check_head(t: f64, history: &HistorySegment) -> Result<()> {
    let latest = history.latest_time();
    if math::abs(t - latest) > 1e-9 * math::max(1.0, history.dt()) {
        return Err(Error::Invalid(format!(
            "right-hand side requested at t = {t} but the history head is {latest}"
        )));
    }
    Ok(())
}

/// Distributed-delay right-hand side: time-average `b∘u` against the `n`-th
/// step kernel, convolve with `f`, and project onto the basis.
pub fn f_n_project(
    t: f64,
    history: &HistorySegment,
    law: &DelayLaw,
    seq: &EpsilonSequence,
    n: usize,
    nl: &Nonlinearity,
    f: &SpatialKernel,
    basis: &SpectralBasis,
) -> Result<RhsEval> {
    check_head(t, history)?;
    let kernel = make_step_kernel(seq, n, law, history.latest_field(), history)?;
    let averaged = history.kernel_time_integral(t, &kernel, basis, |v| nl.eval(v))?;
    let convolved = f.convolve(basis.domain(), &averaged)?;
    Ok(RhsEval {
        field: basis.to_spectral(&convolved)?,
        eta: kernel.eta(),
    })
}

/// Discrete-delay right-hand side: point evaluation of the history at
/// `t − η(u(t), u_t)` instead of the kernel average; otherwise the same
/// pipeline.
pub fn f_discrete_project(
    t: f64,
    history: &HistorySegment,
    law: &DelayLaw,
    nl: &Nonlinearity,
    f: &SpatialKernel,
    basis: &SpectralBasis,
) -> Result<RhsEval> {
    check_head(t, history)?;
    let eta = law.eta_eval(history.latest_field(), history)?;
    if eta > history.delay_span() {
        return Err(Error::SpanNotCovered {
            requested: t - eta,
            lo: t - history.delay_span(),
            hi: t,
        });
    }
    let past = history.eval(t - eta)?;
    let values = basis.to_physical(&past)?;
    let mapped: Vec<f64> = values.iter().map(|v| nl.eval(*v)).collect();
    let convolved = f.convolve(basis.domain(), &mapped)?;
    Ok(RhsEval {
        field: basis.to_spectral(&convolved)?,
        eta,
    })
}

/// The uniform right-hand-side bound `K = M_f · |Ω|^{3/2} · C_b · C_{ξ,1}`
/// (with `C_{ξ,1} = 1` for step kernels and for the discrete-delay form).
pub fn uniform_bound(f: &SpatialKernel, nl: &Nonlinearity, domain: &Domain) -> f64 {
    let l = domain.length();
    f.sup_bound() * l * math::sqrt(l) * nl.bound()
}
