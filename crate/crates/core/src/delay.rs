//! State-dependent delay laws and distributed-delay step kernels.
//!
//! A delay law maps the current state pair `(a, φ) = (u(t), u_t)` to a lag
//! `η(a, φ) ∈ [0, η_max]` with `η_max < r`. Two rules are provided:
//!
//! * constant: `η ≡ η₀`;
//! * sigmoid-of-energy: `η = η_max · σ(c₀ + c₁‖a‖² + c₂·∫_{−r}^0 ‖φ(s)‖² ds)`
//!   with `σ` the logistic function. On a ball of radius `M` in the metric
//!   `dist((v¹,ψ¹),(v²,ψ²)) = (‖v¹−v²‖² + ∫‖ψ¹−ψ²‖²)^{1/2}` it is Lipschitz
//!   with the computable constant
//!
//!   ```text
//!   L_{η,M} = (η_max · M / 2) · hypot(c₁, c₂)
//!   ```
//!
//!   (|σ′| ≤ 1/4, `|‖a¹‖² − ‖a²‖²| ≤ 2M‖a¹−a²‖`, and Cauchy–Schwarz on the
//!   history integral give `|Δ∫‖ψ‖²| ≤ 2M·(∫‖Δψ‖²)^{1/2}`).
//!
//! The distributed approximation replaces the point evaluation `u(t−η)` by an
//! average against the step kernel
//!
//! ```text
//! ξⁿ(θ) = 1/ε_n   on [−η − ε_n, −η],     0 elsewhere,
//! ```
//!
//! which has L¹ mass exactly 1 for every state, sup-norm `1/ε_n`, and —
//! because two such boxes of equal width `ε` overlap by `ε − |Δη|` — L¹
//! distance exactly `2·min(|Δη|, ε)/ε` between the kernels at two states.
//! Chaining with the delay-law Lipschitz bound yields the kernel family's
//! Lipschitz constant `L_{ξ,M,n} = 2 ε_n⁻¹ L_{η,M}`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::history::{dist_h, HistorySegment};
use crate::math;
use crate::spectral::SpectralField;

/// Rule mapping the state pair `(a, φ)` to a delay in `[0, η_max]`.
#[derive(Debug, Clone, PartialEq)]
pub enum DelayLaw {
    Constant {
        eta0: f64,
    },
    SigmoidEnergy {
        eta_max: f64,
        c0: f64,
        c1: f64,
        c2: f64,
    },
}

impl DelayLaw {
    pub fn constant(eta0: f64) -> Result<Self> {
        if !(eta0 >= 0.0) || !eta0.is_finite() {
            return Err(Error::Invalid(format!(
                "constant delay must be nonnegative and finite, got {eta0}"
            )));
        }
        Ok(DelayLaw::Constant { eta0 })
    }

    pub fn sigmoid_energy(eta_max: f64, c0: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(eta_max > 0.0) || !eta_max.is_finite() {
            return Err(Error::Invalid(format!(
                "sigmoid delay cap must be positive and finite, got {eta_max}"
            )));
        }
        for (name, v) in [("c0", c0), ("c1", c1), ("c2", c2)] {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("sigmoid parameter {name} must be finite")));
            }
        }
        Ok(DelayLaw::SigmoidEnergy {
            eta_max,
            c0,
            c1,
            c2,
        })
    }

    /// Largest delay the law can produce.
    pub fn eta_bound(&self) -> f64 {
        match self {
            DelayLaw::Constant { eta0 } => *eta0,
            DelayLaw::SigmoidEnergy { eta_max, .. } => *eta_max,
        }
    }

    /// Delay from the two scalar statistics `‖a‖²` and `∫_{−r}^0 ‖φ‖² ds`.
    pub fn eta_from_stats(&self, state_norm_sq: f64, segment_norm_sq: f64) -> f64 {
        match self {
            DelayLaw::Constant { eta0 } => *eta0,
            DelayLaw::SigmoidEnergy {
                eta_max,
                c0,
                c1,
                c2,
            } => eta_max * math::logistic(c0 + c1 * state_norm_sq + c2 * segment_norm_sq),
        }
    }

    /// Evaluates the delay at the state pair `(a, φ)` with `φ` read at its
    /// latest time.
    pub fn eta_eval(&self, a: &SpectralField, history: &HistorySegment) -> Result<f64> {
        match self {
            DelayLaw::Constant { eta0 } => Ok(*eta0),
            DelayLaw::SigmoidEnergy { .. } => {
                let n = a.norm_l2();
                let seg = history.segment_norm_sq(history.latest_time())?;
                Ok(self.eta_from_stats(n * n, seg))
            }
        }
    }

    /// Lipschitz bound `L_{η,M}` of the law on the ball of radius `M` in the
    /// H-metric.
    pub fn lipschitz_bound(&self, m: f64) -> f64 {
        match self {
            DelayLaw::Constant { .. } => 0.0,
            DelayLaw::SigmoidEnergy {
                eta_max, c1, c2, ..
            } => 0.5 * eta_max * m * math::hypot(*c1, *c2),
        }
    }
}

/// Geometrically decaying kernel widths `ε_n = ε₀ · 2^{−(n−1)}`, `n ≥ 1`.
///
/// Geometric decay keeps convergence-rate slopes readable on a log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSequence {
    eps0: f64,
}

impl EpsilonSequence {
    pub fn new(eps0: f64) -> Result<Self> {
        if !(eps0 > 0.0) || !eps0.is_finite() {
            return Err(Error::Invalid(format!(
                "kernel width scale must be positive and finite, got {eps0}"
            )));
        }
        Ok(EpsilonSequence { eps0 })
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    /// `ε_n` for `n ≥ 1`.
    pub fn value(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::Invalid("kernel index n starts at 1".into()));
        }
        Ok(self.eps0 * math::powf(2.0, -((n - 1) as f64)))
    }
}

/// A concrete step kernel: height `1/ε` on the support `[−η−ε, −η]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepKernel {
    eta: f64,
    epsilon: f64,
}

impl StepKernel {
    pub fn new(eta: f64, epsilon: f64) -> Result<Self> {
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(Error::Invalid(format!(
                "kernel delay must be nonnegative and finite, got {eta}"
            )));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Invalid(format!(
                "kernel width must be positive and finite, got {epsilon}"
            )));
        }
        Ok(StepKernel { eta, epsilon })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Support interval `(−η−ε, −η)` endpoints.
    pub fn support(&self) -> (f64, f64) {
        (-self.eta - self.epsilon, -self.eta)
    }

    /// Kernel height, also its sup-norm.
    pub fn height(&self) -> f64 {
        1.0 / self.epsilon
    }

    /// Pointwise value `ξ(θ)` (closed support).
    pub fn density(&self, theta: f64) -> f64 {
        let (lo, hi) = self.support();
        if theta >= lo && theta <= hi {
            self.height()
        } else {
            0.0
        }
    }

    /// L¹ mass `(hi − lo) · height = ε · (1/ε)`.
    pub fn mass(&self) -> f64 {
        let (lo, hi) = self.support();
        (hi - lo) * self.height()
    }
}

/// Builds the `n`-th step kernel at the state pair `(a, φ)`; rejects
/// configurations whose support could escape `[−r, 0]` (requires
/// `η_max + ε_n ≤ r`).
pub fn make_step_kernel(
    seq: &EpsilonSequence,
    n: usize,
    law: &DelayLaw,
    a: &SpectralField,
    history: &HistorySegment,
) -> Result<StepKernel> {
    let eps = seq.value(n)?;
    let r = history.delay_span();
    if law.eta_bound() + eps > r + 1e-12 {
        return Err(Error::Invalid(format!(
            "delay cap {} plus kernel width {eps} exceeds the delay span {r}",
            law.eta_bound()
        )));
    }
    let eta = law.eta_eval(a, history)?;
    StepKernel::new(eta, eps)
}

/// Exact L¹ distance of two step kernels of common width: two boxes of width
/// `ε` and unit mass whose centers differ by `δ = |Δη|` overlap by
/// `max(ε − δ, 0)`, so the distance is `2·min(δ, ε)/ε`.
pub fn kernel_l1_diff(k1: &StepKernel, k2: &StepKernel) -> Result<f64> {
    let eps = k1.epsilon();
    if math::abs(eps - k2.epsilon()) > 1e-12 * eps {
        return Err(Error::Invalid(
            "kernel L¹ distance requires a common width (same n)".into(),
        ));
    }
    let delta = math::abs(k1.eta() - k2.eta());
    Ok(2.0 * math::min(delta, eps) / eps)
}

/// One state pair `(a, φ)` used as a sampling point for hypothesis checks.
#[derive(Debug, Clone)]
pub struct StateSample {
    pub state: SpectralField,
    pub history: HistorySegment,
}

/// Result of the empirical kernel-hypothesis check; reports rather than
/// fails.
#[derive(Debug, Clone)]
pub struct KernelHypothesisReport {
    pub n: usize,
    pub epsilon: f64,
    pub pairs_checked: usize,
    /// `L_{ξ,M,n} = 2 ε_n⁻¹ L_{η,M}` for the given ball radius `M`.
    pub lipschitz_constant: f64,
    /// Largest `|mass − 1|` over the sampled kernels.
    pub max_mass_defect: f64,
    /// Kernel sup-norm, `1/ε_n` by construction.
    pub sup_norm: f64,
    /// Smallest value of `L_{ξ,M,n}·dist − ∫|ξ(s¹) − ξ(s²)|` over all pairs;
    /// negative values are hypothesis violations.
    pub worst_slack: f64,
    pub violations: usize,
    pub holds: bool,
}

/// Empirically verifies the kernel hypotheses over all pairs drawn from the
/// sample set: unit mass, sup-norm `1/ε_n`, and the L¹-Lipschitz estimate
/// `∫|ξⁿ(θ,s¹) − ξⁿ(θ,s²)| dθ ≤ L_{ξ,M,n} · dist(s¹, s²)` with
/// `L_{ξ,M,n} = 2 ε_n⁻¹ L_{η,M}`.
///
/// `m_radius` must dominate the H-norm of every sample (it enters the
/// Lipschitz bound); pass the empirical maximum if no a-priori ball is known.
pub fn verify_kernel_hypotheses(
    law: &DelayLaw,
    seq: &EpsilonSequence,
    n: usize,
    m_radius: f64,
    samples: &[StateSample],
) -> Result<KernelHypothesisReport> {
    let eps = seq.value(n)?;
    let l_eta = law.lipschitz_bound(m_radius);
    let l_xi = 2.0 * l_eta / eps;

    let mut kernels = Vec::with_capacity(samples.len());
    let mut max_mass_defect: f64 = 0.0;
    for s in samples {
        let k = make_step_kernel(seq, n, law, &s.state, &s.history)?;
        max_mass_defect = math::max(max_mass_defect, math::abs(k.mass() - 1.0));
        kernels.push(k);
    }

    let mut pairs_checked = 0;
    let mut worst_slack = f64::INFINITY;
    let mut violations = 0;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let diff = kernel_l1_diff(&kernels[i], &kernels[j])?;
            let dist = dist_h(
                &samples[i].state,
                &samples[i].history,
                &samples[j].state,
                &samples[j].history,
            )?;
            let slack = l_xi * dist - diff;
            worst_slack = math::min(worst_slack, slack);
            if slack < -1e-12 {
                violations += 1;
            }
            pairs_checked += 1;
        }
    }
    if pairs_checked == 0 {
        worst_slack = 0.0;
    }

    let holds = violations == 0 && max_mass_defect <= 1e-12;
    Ok(KernelHypothesisReport {
        n,
        epsilon: eps,
        pairs_checked,
        lipschitz_constant: l_xi,
        max_mass_defect,
        sup_norm: 1.0 / eps,
        worst_slack,
        violations,
        holds,
    })
}
