//! Inequality checks on computed trajectories: energy growth,
//! dissipativity, continuous dependence, kernel averaging, and the
//! distributed→discrete limit study.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrator::{self, InitialField, RhsMode, Scenario, Trajectory};
use crate::math;
use crate::spectral::SpectralBasis;

use super::{
    derived_constants, log_log_slope, prefix_trapezoid, CheckRecord, ABSOLUTE_FLOOR,
    RELATIVE_SLACK,
};

/// Elapsed times and squared norms shared by the trajectory checks.
fn norm_sq_series(traj: &Trajectory) -> (Vec<f64>, Vec<f64>) {
    let mut taus = Vec::with_capacity(traj.len());
    let mut norms = Vec::with_capacity(traj.len());
    for j in 0..traj.len() {
        taus.push(traj.time(j) - traj.start_time());
        let n = traj.node(j).field.norm_l2();
        norms.push(n * n);
    }
    (taus, norms)
}

/// Checks the a-priori energy estimate along a trajectory:
///
/// ```text
/// ‖u(t)‖² + 2∫₀ᵗ‖A^{1/2}u(τ)‖² dτ + k̃₃ ≤ (‖u(0)‖² + k̃₃) · e^{k̃₁ t}
/// ```
///
/// with `k̃₁ = 1` and `k̃₃ = K²`. The initial node is excluded from the
/// margin (both sides coincide there identically, for every step size).
pub fn energy_check(traj: &Trajectory, scenario: &Scenario) -> Result<CheckRecord> {
    let c = derived_constants(scenario);
    let pairs = energy_pairs(traj, scenario)?;
    Ok(CheckRecord::from_bounds(
        "energy-growth",
        "‖u(t)‖² + 2∫₀ᵗ‖A^{1/2}u‖²dτ + k̃₃ ≤ (‖u(0)‖² + k̃₃)·e^{k̃₁·t}",
        &pairs[1..],
        RELATIVE_SLACK,
    )
    .with_constant("K", c.k_bound)
    .with_constant("k1_tilde", c.k1_tilde)
    .with_constant("k3_tilde", c.k3_tilde))
}

fn energy_pairs(traj: &Trajectory, scenario: &Scenario) -> Result<Vec<(f64, f64)>> {
    let c = derived_constants(scenario);
    let basis = SpectralBasis::new(scenario.domain, scenario.order)?;
    let (taus, norms_sq) = norm_sq_series(traj);
    let mut h1_sq = Vec::with_capacity(traj.len());
    for j in 0..traj.len() {
        h1_sq.push(basis.norm_sq(&traj.node(j).field, 0.5)?);
    }
    let enstrophy = prefix_trapezoid(&h1_sq, traj.dt());
    let u0_sq = norms_sq[0];
    let pairs = taus
        .iter()
        .zip(norms_sq.iter().zip(&enstrophy))
        .map(|(tau, (n_sq, i))| {
            let lhs = n_sq + 2.0 * i + c.k3_tilde;
            let rhs = (u0_sq + c.k3_tilde) * math::exp(c.k1_tilde * tau);
            (lhs, rhs)
        })
        .collect();
    Ok(pairs)
}

/// Worst relative excess of the energy bound at selected elapsed times
/// (used to compare margins across step sizes, where the grids differ).
pub fn energy_margin_at_probes(
    traj: &Trajectory,
    scenario: &Scenario,
    probes: &[f64],
) -> Result<f64> {
    let pairs = energy_pairs(traj, scenario)?;
    let mut worst = f64::NEG_INFINITY;
    for p in probes {
        let j = traj.index_of(traj.start_time() + p)?;
        let (lhs, rhs) = pairs[j];
        worst = math::max(worst, (lhs - rhs) / math::max(math::abs(rhs), ABSOLUTE_FLOOR));
    }
    Ok(worst)
}

/// Checks the dissipativity estimate
///
/// ```text
/// ‖u(t)‖² ≤ ‖u(0)‖² · e^{−(d+2λ₁)t} + K²/(d(d+2λ₁))
/// ```
///
/// whose exponent comes from the Gronwall factor `e^{(d+2λ₁)t}` of the
/// derivation; the variant with exponent `−2(d+λ₁)` (the decay rate the
/// differential inequality itself yields) is evaluated as well and its
/// margin reported in the notes, together with the late-time excess of
/// `‖u‖²` over the asymptotic radius.
pub fn dissipativity_check(traj: &Trajectory, scenario: &Scenario) -> Result<CheckRecord> {
    let c = derived_constants(scenario);
    let elapsed = traj.end_time() - traj.start_time();
    let needed = 10.0 / (c.damping + c.lambda_1);
    if elapsed < needed {
        return Err(Error::HorizonTooShort {
            needed,
            have: elapsed,
        });
    }
    let (taus, norms_sq) = norm_sq_series(traj);
    let u0_sq = norms_sq[0];
    let rate_a = c.damping + 2.0 * c.lambda_1;
    let rate_b = 2.0 * (c.damping + c.lambda_1);
    let pairs: Vec<(f64, f64)> = taus
        .iter()
        .zip(&norms_sq)
        .map(|(tau, n_sq)| (*n_sq, u0_sq * math::exp(-rate_a * tau) + c.radius_sq))
        .collect();
    let mut alt_margin = f64::NEG_INFINITY;
    for (tau, n_sq) in taus.iter().zip(&norms_sq) {
        let rhs = u0_sq * math::exp(-rate_b * tau) + c.radius_sq;
        alt_margin = math::max(alt_margin, (n_sq - rhs) / math::max(rhs, ABSOLUTE_FLOOR));
    }
    // late-time excess over the asymptotic radius alone
    let cut = 0.8 * elapsed;
    let tail_sup = taus
        .iter()
        .zip(&norms_sq)
        .filter(|(tau, _)| **tau >= cut)
        .map(|(_, n)| *n)
        .fold(0.0, math::max);
    let tail_excess = tail_sup - c.radius_sq;
    Ok(CheckRecord::from_bounds(
        "dissipativity",
        "‖u(t)‖² ≤ ‖u(0)‖²·e^{−(d+2λ₁)t} + K²/(d(d+2λ₁))",
        &pairs,
        RELATIVE_SLACK,
    )
    .with_constant("d", c.damping)
    .with_constant("lambda_1", c.lambda_1)
    .with_constant("K", c.k_bound)
    .with_constant("radius_sq", c.radius_sq)
    .with_constant("tail_excess", tail_excess)
    .with_note(format!(
        "steeper-exponent −2(d+λ₁) margin {alt_margin:.3e}; late-time sup ‖u‖² − R∞² = {tail_excess:.3e}"
    )))
}

/// Squared-divergence curve of a paired run.
#[derive(Debug, Clone)]
pub struct DivergenceCurve {
    /// Initial state distance `‖u¹(0) − u²(0)‖`.
    pub delta: f64,
    /// `D(0) = ‖u¹(0) − u²(0)‖²`.
    pub d0: f64,
    /// `∫_{−r}^0 ‖φ¹ − φ²‖² dθ`.
    pub history_gap: f64,
    /// Elapsed grid times.
    pub taus: Vec<f64>,
    /// `D(t) = ‖u¹(t) − u²(t)‖² + 2(λ₁+d)∫₀ᵗ‖u¹ − u²‖² ds`.
    pub values: Vec<f64>,
    /// `sup_t √D(t)`.
    pub sup_sqrt: f64,
}

/// Runs two scenarios sharing grid parameters and returns the divergence
/// curve of their solutions.
pub fn paired_divergence(s1: &Scenario, s2: &Scenario) -> Result<DivergenceCurve> {
    let t1 = integrator::run(s1)?;
    let t2 = integrator::run(s2)?;
    let h1 = s1.initial_history()?;
    let h2 = s2.initial_history()?;
    let history_gap = h1.window_distance_sq(&h2, 0.0)?;
    divergence_curve(&t1, &t2, s1, history_gap)
}

fn divergence_curve(
    t1: &Trajectory,
    t2: &Trajectory,
    scenario: &Scenario,
    history_gap: f64,
) -> Result<DivergenceCurve> {
    if t1.len() != t2.len() {
        return Err(Error::DimensionMismatch {
            expected: t1.len(),
            got: t2.len(),
        });
    }
    let c = derived_constants(scenario);
    let mut taus = Vec::with_capacity(t1.len());
    let mut w_sq = Vec::with_capacity(t1.len());
    for j in 0..t1.len() {
        taus.push(t1.time(j) - t1.start_time());
        let d = t1.node(j).field.l2_distance(&t2.node(j).field);
        w_sq.push(d * d);
    }
    let prefix = prefix_trapezoid(&w_sq, t1.dt());
    let weight = 2.0 * (c.lambda_1 + c.damping);
    let values: Vec<f64> = w_sq
        .iter()
        .zip(&prefix)
        .map(|(w, p)| w + weight * p)
        .collect();
    let sup_sqrt = values.iter().fold(0.0, |a, v| math::max(a, *v));
    Ok(DivergenceCurve {
        delta: math::sqrt(w_sq[0]),
        d0: w_sq[0],
        history_gap,
        taus,
        values,
        sup_sqrt: math::sqrt(sup_sqrt),
    })
}

/// Growth exponent of a divergence curve: the smallest `C₅ > 0` with
/// `D(t) ≤ D(0)·e^{C₅t}` along the whole curve, computed directly as
/// `max_{t>0} t⁻¹·ln(D(t)/D(0))` and clamped below at `10⁻⁶`. Fitting the
/// pure envelope keeps the exponent meaningful: the full estimate also
/// carries the history-gap term `C₄·G/C₅`, which diverges as `C₅ → 0` and
/// would let an arbitrarily small exponent satisfy the inequality
/// vacuously. Returns `None` when `D(0) = 0` (a history-only perturbation
/// has no envelope to fit; its divergence is controlled through the gap
/// term alone).
fn fit_c5(curve: &DivergenceCurve) -> Option<f64> {
    if !(curve.d0 > 0.0) {
        return None;
    }
    let mut c5: f64 = 0.0;
    for (tau, d) in curve.taus.iter().zip(&curve.values).skip(1) {
        if *d > 0.0 {
            c5 = math::max(c5, math::ln(d / curve.d0) / tau);
        }
    }
    Some(math::max(c5, 1e-6))
}

#[derive(Debug, Clone)]
pub struct ContinuousDependenceReport {
    pub record: CheckRecord,
    /// The history-term weight fitted from the Lipschitz data of `b`, `ξ`.
    pub c4: f64,
    pub curves: Vec<DivergenceCurve>,
    /// Envelope exponents, one per perturbation size: the smallest `C₅`
    /// with `D(t) ≤ D(0)·e^{C₅t}` along that curve.
    pub fitted_c5: Vec<f64>,
}

/// Checks continuous dependence on initial data: for each perturbation size
/// `δ`, runs the scenario against a copy whose initial state is shifted by
/// `δ·e₁`, fits the envelope exponent `C₅` (smallest value with
/// `D(t) ≤ D(0)·e^{C₅t}`), and verifies the full estimate
///
/// ```text
/// D(t) ≤ (D(0) + C₄·C₅⁻¹·∫_{−r}^0‖φ¹−φ²‖²)·e^{C₅t},
/// D(t) = ‖u¹−u²‖² + 2(λ₁+d)∫₀ᵗ‖u¹−u²‖²
/// ```
///
/// at the fitted exponent. Asserts the first-order response (`sup_t √D`
/// scales linearly with `δ`, ±20% per halving) and the stability of the
/// fitted `C₅` across the `δ` ladder (±25% around the mean) — in the
/// linear-response regime `D(t)/D(0)` is independent of `δ`, so the fitted
/// exponent must not drift. The delay term is forced to a distributed
/// kernel (`n = 3` by default) because `C₄` involves the kernel's Lipschitz
/// constant, which needs a finite kernel width.
pub fn continuous_dependence_check(
    scenario: &Scenario,
    deltas: &[f64],
) -> Result<ContinuousDependenceReport> {
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Invalid(
            "continuous dependence needs positive perturbation sizes".into(),
        ));
    }
    let mut base = scenario.clone();
    if let RhsMode::Discrete = base.mode {
        base.mode = RhsMode::Distributed { n: 3 };
    }
    base.validate()?;
    let base_traj = integrator::run(&base)?;
    let base_hist = base.initial_history()?;
    let u0 = base.initial.u0.build(base.order)?;

    let mut curves = Vec::with_capacity(deltas.len());
    let mut sup_norm_all = sup_norm(&base_traj);
    let mut perturbed_runs = Vec::with_capacity(deltas.len());
    for delta in deltas {
        let mut coeffs = u0.coeffs().to_vec();
        coeffs[0] += delta;
        let mut pert = base.clone();
        pert.initial.u0 = InitialField::Coeffs(coeffs);
        let traj = integrator::run(&pert)?;
        sup_norm_all = math::max(sup_norm_all, sup_norm(&traj));
        let gap = base_hist.window_distance_sq(&pert.initial_history()?, 0.0)?;
        perturbed_runs.push((traj, gap));
    }
    for (traj, gap) in &perturbed_runs {
        curves.push(divergence_curve(&base_traj, traj, &base, *gap)?);
    }

    // C₄ from the Lipschitz chain of the right-hand side: splitting the
    // difference of F into a b-part and a kernel-part gives
    //   |⟨F(u¹_t) − F(u²_t), w⟩| ≤ C₃‖w(t)‖² + C₄∫_{−r}^0‖w(t+θ)‖²dθ
    // with C₄ = M_f·L_b·|Ω|/(2ε) + ½·M_f·C_b·|Ω|^{3/2}·(2L_{η,M}/ε),
    // where M bounds sup_t dist((u(t),u_t), 0); we use M = S·√(1+r) with S
    // the sup of ‖u‖ over all runs involved.
    let eps = match base.mode {
        RhsMode::Distributed { n } => base.eps.value(n)?,
        RhsMode::Discrete => unreachable!("mode forced to distributed above"),
    };
    let l = base.domain.length();
    let m_ball = sup_norm_all * math::sqrt(1.0 + base.delay_span);
    let l_eta = base.law.lipschitz_bound(m_ball);
    let m_f = base.spatial.sup_bound();
    let c4 = m_f * base.nonlinearity.lipschitz() * l / (2.0 * eps)
        + 0.5 * m_f * base.nonlinearity.bound() * l * math::sqrt(l) * (2.0 * l_eta / eps);

    let mut fitted = Vec::with_capacity(curves.len());
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut fit_failed = false;
    for curve in &curves {
        match fit_c5(curve) {
            Some(c5) => {
                fitted.push(c5);
                // the stated estimate at the fitted exponent: the gap term
                // only adds slack over the fitted envelope, so this pair
                // documents the inequality itself
                let envelope_gap = curve
                    .taus
                    .iter()
                    .zip(&curve.values)
                    .map(|(tau, d)| d / math::exp(c5 * tau))
                    .fold(0.0, math::max);
                pairs.push((envelope_gap, curve.d0 + c4 * curve.history_gap / c5));
            }
            None => {
                fit_failed = true;
                fitted.push(f64::INFINITY);
            }
        }
    }
    // first-order response: sup √D should scale like δ
    for w in 0..curves.len().saturating_sub(1) {
        let rho = curves[w + 1].delta / curves[w].delta;
        let ratio = curves[w + 1].sup_sqrt / curves[w].sup_sqrt;
        pairs.push((math::abs(ratio - rho), 0.2 * rho));
    }
    // C₅ stability across the ladder
    if !fit_failed && fitted.len() > 1 {
        let mean: f64 = fitted.iter().sum::<f64>() / fitted.len() as f64;
        let max_dev = fitted
            .iter()
            .map(|c| math::abs(c - mean))
            .fold(0.0, math::max);
        pairs.push((max_dev, 0.25 * mean));
    }
    let mut record = CheckRecord::from_bounds(
        "continuous-dependence",
        "‖u¹(t)−u²(t)‖² + 2(λ₁+d)∫₀ᵗ‖u¹−u²‖² ≤ (‖u¹(0)−u²(0)‖² + C₄C₅⁻¹∫_{−r}^0‖φ¹−φ²‖²)·e^{C₅t}",
        &pairs,
        1e-9,
    )
    .with_constant("C4", c4)
    .with_note(format!("fitted C5 ladder: {fitted:?}"));
    if fit_failed {
        record.passed = false;
    }
    Ok(ContinuousDependenceReport {
        record,
        c4,
        curves,
        fitted_c5: fitted,
    })
}

fn sup_norm(traj: &Trajectory) -> f64 {
    (0..traj.len())
        .map(|j| traj.node(j).field.norm_l2())
        .fold(0.0, math::max)
}

#[derive(Debug, Clone)]
pub struct LebesgueReport {
    pub record: CheckRecord,
    pub eps: Vec<f64>,
    /// `|windowed average − y(−h)|` per kernel width.
    pub errors: Vec<f64>,
    /// Log-log regression slope of error against width (`None` when the
    /// errors vanish).
    pub slope: Option<f64>,
}

/// Checks the scalar computational content of the kernel limit: averaging a
/// signal `y` against the step kernel of width `ε` anchored at lag `h`
/// satisfies
///
/// ```text
/// |ε⁻¹∫_{−h−ε}^{−h} y(θ)dθ − y(−h)| ≤ Lip(y)·ε/2,
/// ```
///
/// with equality `|s|·ε/2` for linear `y` of slope `s`, and the error decays
/// with empirical order ≥ 0.9 as `ε → 0`.
pub fn lebesgue_check<Y>(
    y: Y,
    lipschitz: Option<f64>,
    h: f64,
    eps_list: &[f64],
    delay_span: f64,
) -> Result<LebesgueReport>
where
    Y: Fn(f64) -> f64,
{
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Invalid("kernel widths must be positive".into()));
    }
    let widest = eps_list.iter().fold(0.0, |a, e| math::max(a, *e));
    if h + widest > delay_span + 1e-12 {
        return Err(Error::Invalid(format!(
            "lag {h} plus widest kernel {widest} escapes the span {delay_span}"
        )));
    }
    const NODES: usize = 1024;
    let mut errors = Vec::with_capacity(eps_list.len());
    for eps in eps_list {
        let lo = -h - eps;
        let step = eps / NODES as f64;
        let mut acc = 0.0;
        for q in 0..=NODES {
            let w = if q == 0 || q == NODES { 0.5 } else { 1.0 };
            acc += w * y(lo + q as f64 * step);
        }
        let average = acc * step / eps;
        errors.push(math::abs(average - y(-h)));
    }
    let slope = log_log_slope(eps_list, &errors);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    if let Some(lip) = lipschitz {
        for (eps, err) in eps_list.iter().zip(&errors) {
            pairs.push((*err, lip * eps / 2.0));
        }
    }
    let exact = errors.iter().all(|e| *e < 1e-13);
    if let Some(s) = slope {
        if !exact {
            pairs.push((0.9, s));
        }
    }
    let mut record = CheckRecord::from_bounds(
        "kernel-averaging",
        "|ε⁻¹∫_{−h−ε}^{−h} y(θ)dθ − y(−h)| ≤ Lip(y)·ε/2, empirical order ≥ 0.9",
        &pairs,
        1e-9,
    );
    if exact {
        record.notes = String::from("averaging error vanishes to rounding (constant signal)");
    } else if slope.is_none() && lipschitz.is_none() {
        record.notes = String::from("no Lipschitz bound supplied and slope unavailable");
    }
    Ok(LebesgueReport {
        record,
        eps: eps_list.to_vec(),
        errors,
        slope,
    })
}

#[derive(Debug, Clone)]
pub struct LimitingReport {
    pub record: CheckRecord,
    pub ns: Vec<usize>,
    /// `e(n) = max_j ‖u⁽ⁿ⁾(t_j) − u^{disc}(t_j)‖`.
    pub errors: Vec<f64>,
    /// Kernel widths matching `ns`.
    pub eps: Vec<f64>,
    /// `max_j ‖u^{disc}(t_j)‖`, the scale for the default tolerance.
    pub reference_scale: f64,
    pub tolerance: f64,
    pub slope: Option<f64>,
}

/// Runs the discrete-delay reference and the distributed family over the
/// kernel indices `ns` with identical data, and checks that the family
/// converges to the reference: `e(n)` non-increasing with mean reduction
/// factor ≥ 1.5 per width halving, and `e(n_max)` at most 1% of the
/// reference's sup norm.
pub fn limiting_solution_study(scenario: &Scenario, ns: &[usize]) -> Result<LimitingReport> {
    if ns.len() < 2 {
        return Err(Error::Invalid(
            "limit study needs at least two kernel indices".into(),
        ));
    }
    for w in ns.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Invalid("kernel indices must increase".into()));
        }
    }
    let mut reference = scenario.clone();
    reference.mode = RhsMode::Discrete;
    reference.validate()?;
    let ref_traj = integrator::run(&reference)?;
    let family = integrator::run_family(scenario, ns)?;

    let reference_scale = sup_norm(&ref_traj);
    let tolerance = 1e-2 * reference_scale;
    let mut errors = Vec::with_capacity(ns.len());
    for traj in &family {
        let mut worst: f64 = 0.0;
        for j in 0..traj.len() {
            worst = math::max(
                worst,
                traj.node(j).field.l2_distance(&ref_traj.node(j).field),
            );
        }
        errors.push(worst);
    }
    let eps: Vec<f64> = ns
        .iter()
        .map(|n| scenario.eps.value(*n))
        .collect::<Result<_>>()?;
    let slope = log_log_slope(&eps, &errors);

    let exact = errors.iter().all(|e| *e < 1e-13);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    if !exact {
        for w in errors.windows(2) {
            pairs.push((w[1], w[0])); // non-increasing
        }
        let mut ratios = Vec::new();
        for w in errors.windows(2) {
            if w[1] > 0.0 {
                ratios.push(w[0] / w[1]);
            }
        }
        if !ratios.is_empty() {
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            pairs.push((1.5, mean)); // mean reduction factor ≥ 1.5
        }
        pairs.push((errors[errors.len() - 1], tolerance));
    }
    let mut record = CheckRecord::from_bounds(
        "distributed-to-discrete-limit",
        "max_t ‖u⁽ⁿ⁾(t) − u^{disc}(t)‖ → 0 as the kernel width ε_n → 0",
        &pairs,
        RELATIVE_SLACK,
    )
    .with_constant("reference_scale", reference_scale)
    .with_constant("tolerance", tolerance);
    if exact {
        record.notes = String::from("family coincides with the reference to rounding");
    } else {
        record.notes = format!("sup errors {errors:?}, widths {eps:?}, slope {slope:?}");
    }
    Ok(LimitingReport {
        record,
        ns: ns.to_vec(),
        errors,
        eps,
        reference_scale,
        tolerance,
        slope,
    })
}
