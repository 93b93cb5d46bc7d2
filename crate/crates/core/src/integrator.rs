//! Exponential-Euler time integration of the Galerkin system with
//! method-of-steps history.
//!
//! Projecting the model onto the first `m` Dirichlet modes gives, per
//! coefficient `g_k` and with `μ_k = λ_k + d`,
//!
//! ```text
//! ġ_k + μ_k g_k = F_k(u_t),        F_k = ⟨F(u_t), e_k⟩.
//! ```
//!
//! One step freezes the right-hand side at the step start (including the
//! state-dependent delay `η(u(t_j), u_{t_j})`) and solves the linear part
//! exactly:
//!
//! ```text
//! g_k(t_{j+1}) = e^{−μ_k Δt} g_k(t_j) + (1 − e^{−μ_k Δt})/μ_k · F_k(u_{t_j}).
//! ```
//!
//! The stiff linear part (`λ_m` grows like `m²`) is handled exactly, so the
//! scheme is stable for any `Δt`; freezing the nonstiff delay term makes the
//! method first order. With `F ≡ 0` the integrator is exact to rounding for
//! any step size.

use alloc::format;
use alloc::vec::Vec;

use crate::delay::{DelayLaw, EpsilonSequence};
use crate::error::{Error, Result};
use crate::history::{steps_in_span, HistorySegment};
use crate::math;
use crate::rhs::{f_discrete_project, f_n_project, Nonlinearity, RhsEval, SpatialKernel};
use crate::spectral::{Domain, SpectralBasis, SpectralField};

/// Which right-hand side drives the run: the discrete-delay model or its
/// distributed-delay approximation with the `n`-th step kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsMode {
    Discrete,
    Distributed { n: usize },
}

/// How the state at time zero is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialField {
    /// Explicit leading coefficients, zero-padded up to the basis order.
    Coeffs(Vec<f64>),
    /// `amplitude · e_k`.
    Mode { k: usize, amplitude: f64 },
}

impl InitialField {
    pub fn build(&self, order: usize) -> Result<SpectralField> {
        match self {
            InitialField::Coeffs(c) => {
                if c.len() > order {
                    return Err(Error::DimensionMismatch {
                        expected: order,
                        got: c.len(),
                    });
                }
                let mut g = alloc::vec![0.0; order];
                g[..c.len()].copy_from_slice(c);
                Ok(SpectralField::from_coeffs(g))
            }
            InitialField::Mode { k, amplitude } => {
                if *k < 1 || *k > order {
                    return Err(Error::Invalid(format!(
                        "initial mode index {k} outside 1..={order}"
                    )));
                }
                Ok(SpectralField::unit_mode(order, *k).scaled(*amplitude))
            }
        }
    }
}

/// The history `φ` on `(−r, 0)` relative to the initial field `u⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistorySpec {
    /// `φ(θ) = u⁰` (held constant).
    Hold,
    /// `φ ≡ 0`.
    Zero,
    /// Linear ramp `φ(θ) = (1 + θ/r)·u⁰`, vanishing at `−r`.
    Ramp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: InitialField,
    pub history: HistorySpec,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub domain: Domain,
    /// Galerkin order `m`.
    pub order: usize,
    /// Damping `d > 0`.
    pub damping: f64,
    /// Delay span `r`.
    pub delay_span: f64,
    pub dt: f64,
    /// Horizon `T`.
    pub horizon: f64,
    pub nonlinearity: Nonlinearity,
    pub spatial: SpatialKernel,
    pub law: DelayLaw,
    pub mode: RhsMode,
    pub eps: EpsilonSequence,
    pub initial: InitialData,
}

impl Scenario {
    /// Checks the cross-field invariants; every run calls this first.
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0) || !self.damping.is_finite() {
            return Err(Error::Invalid(format!(
                "damping must be positive and finite, got {}",
                self.damping
            )));
        }
        steps_in_span(self.delay_span, self.dt)?;
        if !(self.horizon >= self.dt) {
            return Err(Error::Invalid(format!(
                "horizon {} shorter than one step {}",
                self.horizon, self.dt
            )));
        }
        match self.mode {
            RhsMode::Discrete => {
                if self.law.eta_bound() > self.delay_span {
                    return Err(Error::Invalid(format!(
                        "delay cap {} exceeds the delay span {}",
                        self.law.eta_bound(),
                        self.delay_span
                    )));
                }
            }
            RhsMode::Distributed { n } => {
                if n < 1 {
                    return Err(Error::Invalid("kernel index n starts at 1".into()));
                }
                // ε₁ is the widest kernel of the family: if it fits, all do.
                let eps1 = self.eps.value(1)?;
                if self.law.eta_bound() + eps1 > self.delay_span + 1e-12 {
                    return Err(Error::Invalid(format!(
                        "delay cap {} plus widest kernel {eps1} exceeds the delay span {}",
                        self.law.eta_bound(),
                        self.delay_span
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of time steps to cover the horizon (exact when `T/Δt` is an
    /// integer, rounded up otherwise).
    pub fn step_count(&self) -> usize {
        count_steps(self.horizon, self.dt)
    }

    /// Builds the initial history segment from the initial-data spec.
    pub fn initial_history(&self) -> Result<HistorySegment> {
        let u0 = self.initial.u0.build(self.order)?;
        let r = self.delay_span;
        match self.initial.history {
            HistorySpec::Hold => {
                let held = u0.clone();
                HistorySegment::init_from_initial_data(u0, move |_| held.clone(), r, self.dt)
            }
            HistorySpec::Zero => {
                let order = self.order;
                HistorySegment::init_from_initial_data(
                    u0,
                    move |_| SpectralField::zero(order),
                    r,
                    self.dt,
                )
            }
            HistorySpec::Ramp => {
                let ramp = u0.clone();
                HistorySegment::init_from_initial_data(
                    u0,
                    move |t| ramp.scaled(1.0 + t / r),
                    r,
                    self.dt,
                )
            }
        }
    }
}

fn count_steps(span: f64, dt: f64) -> usize {
    match math::nearest_integer(span / dt, 1e-9) {
        Some(n) if n >= 1 => n as usize,
        _ => {
            let mut n = (span / dt) as usize;
            if (n as f64) * dt < span {
                n += 1;
            }
            n.max(1)
        }
    }
}

/// One recorded trajectory node: the state, the right-hand side evaluated at
/// this node (frozen value used for the step leaving it), and the delay that
/// produced it.
#[derive(Debug, Clone)]
pub struct TrajectoryNode {
    pub field: SpectralField,
    pub rhs: SpectralField,
    pub eta: f64,
}

/// Uniformly sampled solution with per-node diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    start: f64,
    dt: f64,
    nodes: Vec<TrajectoryNode>,
}

impl Trajectory {
    pub(crate) fn from_parts(start: f64, dt: f64, nodes: Vec<TrajectoryNode>) -> Self {
        Trajectory { start, dt, nodes }
    }

    pub fn start_time(&self) -> f64 {
        self.start
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.start + j as f64 * self.dt
    }

    pub fn node(&self, j: usize) -> &TrajectoryNode {
        &self.nodes[j]
    }

    pub fn nodes(&self) -> &[TrajectoryNode] {
        &self.nodes
    }

    pub fn final_field(&self) -> &SpectralField {
        &self.nodes[self.nodes.len() - 1].field
    }

    /// Grid index of time `t`; errors if `t` is off the stored grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let pos = (t - self.start) / self.dt;
        match math::nearest_integer(pos, 1e-9) {
            Some(j) if j >= 0 && (j as usize) < self.nodes.len() => Ok(j as usize),
            _ => Err(Error::SpanNotCovered {
                requested: t,
                lo: self.start,
                hi: self.end_time(),
            }),
        }
    }

    /// The state at a stored grid time.
    pub fn field_at(&self, t: f64) -> Result<&SpectralField> {
        Ok(&self.nodes[self.index_of(t)?].field)
    }

    /// Reconstructs the solution segment `u_t` on `[t − r, t]` from stored
    /// nodes (requires `t ≥ start + r`).
    pub fn history_at(&self, t: f64, delay_span: f64) -> Result<HistorySegment> {
        let j = self.index_of(t)?;
        let back = steps_in_span(delay_span, self.dt)?;
        if j < back {
            return Err(Error::HorizonTooShort {
                needed: delay_span,
                have: j as f64 * self.dt,
            });
        }
        let fields = self.nodes[j - back..=j]
            .iter()
            .map(|n| n.field.clone())
            .collect();
        HistorySegment::from_uniform_samples(self.time(j - back), self.dt, fields, delay_span)
    }
}

/// Precomputed per-mode propagators for one scenario.
pub struct Stepper {
    scenario: Scenario,
    basis: SpectralBasis,
    /// `e^{−μ_k Δt}`.
    decay: Vec<f64>,
    /// `(1 − e^{−μ_k Δt})/μ_k`.
    weight: Vec<f64>,
}

impl Stepper {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let basis = SpectralBasis::new(scenario.domain, scenario.order)?;
        let mut decay = Vec::with_capacity(scenario.order);
        let mut weight = Vec::with_capacity(scenario.order);
        for k in 1..=scenario.order {
            let mu = basis.eigenvalue(k) + scenario.damping;
            decay.push(math::exp(-mu * scenario.dt));
            // −expm1(−x)/μ is accurate for small μΔt
            weight.push(-math::expm1(-mu * scenario.dt) / mu);
        }
        Ok(Stepper {
            scenario,
            basis,
            decay,
            weight,
        })
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Evaluates the configured right-hand side at the history head.
    pub fn eval_rhs(&self, t: f64, history: &HistorySegment) -> Result<RhsEval> {
        let s = &self.scenario;
        match s.mode {
            RhsMode::Discrete => {
                f_discrete_project(t, history, &s.law, &s.nonlinearity, &s.spatial, &self.basis)
            }
            RhsMode::Distributed { n } => f_n_project(
                t,
                history,
                &s.law,
                &s.eps,
                n,
                &s.nonlinearity,
                &s.spatial,
                &self.basis,
            ),
        }
    }

    /// Advances the history head from `t_j` to `t_{j+1} = t_j + Δt` given the
    /// right-hand side frozen at `t_j`; returns the new state.
    pub fn step(&self, rhs: &RhsEval, history: &mut HistorySegment, t_next: f64) -> Result<SpectralField> {
        let g = history.latest_field().coeffs();
        let coeffs: Vec<f64> = g
            .iter()
            .zip(rhs.field.coeffs())
            .zip(self.decay.iter().zip(&self.weight))
            .map(|((g_k, f_k), (dec, wgt))| dec * g_k + wgt * f_k)
            .collect();
        let next = SpectralField::from_coeffs(coeffs);
        if !next.is_finite() {
            return Err(Error::NonFiniteState { t: t_next });
        }
        history.append(t_next, next.clone())?;
        Ok(next)
    }
}

/// Integrates the scenario from its initial data over `[0, T]`.
pub fn run(scenario: &Scenario) -> Result<Trajectory> {
    let stepper = Stepper::new(scenario.clone())?;
    let history = stepper.scenario().initial_history()?;
    run_steps(&stepper, history, scenario.step_count())
}

/// Continues a run from an existing history segment until time `until`.
/// The segment's grid must match the scenario (`Δt`, order, delay span).
pub fn run_from(scenario: &Scenario, history: HistorySegment, until: f64) -> Result<Trajectory> {
    let stepper = Stepper::new(scenario.clone())?;
    if history.order() != scenario.order {
        return Err(Error::DimensionMismatch {
            expected: scenario.order,
            got: history.order(),
        });
    }
    if math::abs(history.dt() - scenario.dt) > 1e-12 * scenario.dt {
        return Err(Error::Invalid(format!(
            "history grid step {} does not match the scenario step {}",
            history.dt(),
            scenario.dt
        )));
    }
    let span = until - history.latest_time();
    if !(span >= scenario.dt) {
        return Err(Error::HorizonTooShort {
            needed: scenario.dt,
            have: span,
        });
    }
    run_steps(&stepper, history, count_steps(span, scenario.dt))
}

fn run_steps(stepper: &Stepper, mut history: HistorySegment, steps: usize) -> Result<Trajectory> {
    let start = history.latest_time();
    let dt = stepper.scenario().dt;
    let mut nodes = Vec::with_capacity(steps + 1);
    for j in 0..steps {
        let t = start + j as f64 * dt;
        let rhs = stepper.eval_rhs(t, &history)?;
        let field = history.latest_field().clone();
        let next = stepper.step(&rhs, &mut history, start + (j + 1) as f64 * dt)?;
        nodes.push(TrajectoryNode {
            field,
            eta: rhs.eta,
            rhs: rhs.field,
        });
        let _ = next;
    }
    // final node, with its own diagnostics
    let t_end = start + steps as f64 * dt;
    let rhs = stepper.eval_rhs(t_end, &history)?;
    nodes.push(TrajectoryNode {
        field: history.latest_field().clone(),
        eta: rhs.eta,
        rhs: rhs.field,
    });
    Ok(Trajectory {
        start,
        dt,
        nodes,
    })
}

/// Runs the distributed-delay scenario once per kernel index in `ns`,
/// sharing the initial data and grids.
pub fn run_family(scenario: &Scenario, ns: &[usize]) -> Result<Vec<Trajectory>> {
    let mut out = Vec::with_capacity(ns.len());
    for n in ns {
        let mut member = scenario.clone();
        member.mode = RhsMode::Distributed { n: *n };
        out.push(run(&member)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_scenario() -> Scenario {
        Scenario {
            domain: Domain::new(core::f64::consts::PI, 16).unwrap(),
            order: 4,
            damping: 1.0,
            delay_span: 1.0,
            dt: 0.125,
            horizon: 3.0,
            nonlinearity: Nonlinearity::Zero,
            spatial: SpatialKernel::constant(1.0).unwrap(),
            law: DelayLaw::constant(0.5).unwrap(),
            mode: RhsMode::Discrete,
            eps: EpsilonSequence::new(0.125).unwrap(),
            initial: InitialData {
                u0: InitialField::Mode {
                    k: 1,
                    amplitude: 1.0,
                },
                history: HistorySpec::Hold,
            },
        }
    }

    #[test]
    fn linear_decay_is_exact() {
        // F ≡ 0, u⁰ = e₁, λ₁ + d = 2: u(t) = e^{−2t} e₁ exactly
        let traj = run(&base_scenario()).unwrap();
        for j in 0..traj.len() {
            let t = traj.time(j);
            let got = traj.node(j).field.norm_l2();
            assert!(
                (got - math::exp(-2.0 * t)).abs() < 1e-10,
                "t = {t}: {got} vs {}",
                math::exp(-2.0 * t)
            );
        }
    }

    #[test]
    fn constant_forcing_converges_to_the_fixed_point() {
        // b ≡ 1/2 via a constant table: F is constant in time, so the affine
        // step map contracts to g_k* = F_k / μ_k geometrically.
        let mut s = base_scenario();
        s.nonlinearity =
            Nonlinearity::tabulated(alloc::vec![-1.0, 1.0], alloc::vec![0.5, 0.5]).unwrap();
        s.horizon = 40.0;
        s.dt = 0.25;
        let stepper = Stepper::new(s.clone()).unwrap();
        let traj = run(&s).unwrap();
        let last = traj.final_field();
        let rhs = &traj.node(traj.len() - 1).rhs;
        for k in 1..=s.order {
            let mu = stepper.basis().eigenvalue(k) + s.damping;
            let target = rhs.coeffs()[k - 1] / mu;
            assert!(
                (last.coeffs()[k - 1] - target).abs() < 1e-10,
                "mode {k}: {} vs {target}",
                last.coeffs()[k - 1]
            );
        }

        // geometric approach: the slowest mode contracts by e^{−μ₁Δt} per step
        let g_star = traj.node(traj.len() - 1).rhs.coeffs()[0]
            / (stepper.basis().eigenvalue(1) + s.damping);
        let e_early = (traj.node(20).field.coeffs()[0] - g_star).abs();
        let e_later = (traj.node(21).field.coeffs()[0] - g_star).abs();
        let contraction = e_later / e_early;
        let expected = math::exp(-(stepper.basis().eigenvalue(1) + s.damping) * s.dt);
        assert!((contraction - expected).abs() < 1e-6);
    }

    #[test]
    fn validation_rejects_bad_scenarios() {
        let mut s = base_scenario();
        s.damping = 0.0;
        assert!(s.validate().is_err());

        let mut s = base_scenario();
        s.dt = 0.3; // r/Δt not integral
        assert!(s.validate().is_err());

        let mut s = base_scenario();
        s.horizon = 0.05;
        assert!(s.validate().is_err());

        let mut s = base_scenario();
        s.law = DelayLaw::constant(0.95).unwrap();
        s.mode = RhsMode::Distributed { n: 1 };
        s.eps = EpsilonSequence::new(0.25).unwrap(); // 0.95 + 0.25 > 1
        assert!(s.validate().is_err());

        let mut s = base_scenario();
        s.mode = RhsMode::Distributed { n: 0 };
        assert!(s.validate().is_err());
    }

    fn nicholson_scenario() -> Scenario {
        let mut s = base_scenario();
        s.nonlinearity = Nonlinearity::nicholson(2.0).unwrap();
        s.law = DelayLaw::sigmoid_energy(0.5, 0.0, 0.5, 0.25).unwrap();
        s.dt = 1.0 / 64.0;
        s.horizon = 3.0;
        s
    }

    #[test]
    fn runs_are_deterministic() {
        let s = nicholson_scenario();
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        assert_eq!(a.len(), b.len());
        for j in 0..a.len() {
            assert_eq!(a.node(j).field, b.node(j).field);
            assert_eq!(a.node(j).eta, b.node(j).eta);
        }
    }

    #[test]
    fn restart_reproduces_the_tail() {
        let s = nicholson_scenario();
        let full = run(&s).unwrap();
        let t1 = 2.0;
        let seg = full.history_at(t1, s.delay_span).unwrap();
        let tail = run_from(&s, seg, s.horizon).unwrap();
        assert!((tail.start_time() - t1).abs() < 1e-12);
        assert!((tail.end_time() - full.end_time()).abs() < 1e-9);
        for j in 0..tail.len() {
            let t = tail.time(j);
            let orig = full.field_at(t).unwrap();
            let d = orig.l2_distance(&tail.node(j).field);
            assert!(d < 1e-10, "t = {t}: distance {d}");
        }
    }

    #[test]
    fn family_of_size_one_reduces_to_run() {
        let mut s = nicholson_scenario();
        s.mode = RhsMode::Distributed { n: 2 };
        s.horizon = 1.0;
        let fam = run_family(&s, &[2]).unwrap();
        let single = run(&s).unwrap();
        assert_eq!(fam.len(), 1);
        for j in 0..single.len() {
            assert_eq!(fam[0].node(j).field, single.node(j).field);
        }
    }

    #[test]
    fn trajectory_indexing_and_history_reconstruction() {
        let s = nicholson_scenario();
        let traj = run(&s).unwrap();
        assert_eq!(traj.index_of(0.0).unwrap(), 0);
        assert!(traj.index_of(0.017).is_err()); // off-grid
        assert!(traj.index_of(1e9).is_err());
        assert!(traj.history_at(0.5, s.delay_span).is_err()); // needs t ≥ r
        let seg = traj.history_at(1.5, s.delay_span).unwrap();
        assert!((seg.latest_time() - 1.5).abs() < 1e-12);
        assert_eq!(seg.latest_field(), traj.field_at(1.5).unwrap());
    }
}
