//! Trajectory-space diagnostics: the bounded-window norm, time
//! translations, ensembles, the absorbing-ball check, and the attraction
//! surrogate.
//!
//! The working norm is
//!
//! ```text
//! ‖w‖ = sup_h ∫_h^{h+1} ‖A^{1/2}w(s)‖² ds
//!     + sup_t ‖w(t)‖
//!     + sup_h ∫_h^{h+1} ‖A^{−1/2}ẇ(s)‖² ds
//! ```
//!
//! — window integrals of *squares*, without square roots, summed with the
//! plain sup norm exactly as the trajectory-space construction prints it.
//! The velocity is never stored: on the Galerkin manifold it is recovered
//! exactly from the equation, `u̇_k = −(λ_k + d)g_k + F_k`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrator::{
    self, HistorySpec, InitialData, InitialField, RhsMode, Scenario, Trajectory,
};
use crate::math;
use crate::spectral::{Domain, SpectralBasis};

use super::{derived_constants, CheckRecord, RELATIVE_SLACK};

/// The three components of the bounded-window norm and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbNorm {
    /// `sup_h ∫_h^{h+1} ‖A^{1/2}u‖² ds`.
    pub h1_window: f64,
    /// `sup_t ‖u(t)‖`.
    pub sup_l2: f64,
    /// `sup_h ∫_h^{h+1} ‖A^{−1/2}u̇‖² ds`.
    pub dual_window: f64,
    /// Sum of the three parts.
    pub total: f64,
}

/// Per-node integrand series used by the window norms.
struct NormSeries {
    /// `‖A^{1/2}u(t_j)‖²`.
    h1_sq: Vec<f64>,
    /// `‖A^{−1/2}u̇(t_j)‖²` with `u̇` reconstructed from the equation.
    dual_sq: Vec<f64>,
    /// `‖u(t_j)‖`.
    l2: Vec<f64>,
    /// Grid steps per unit window.
    window_steps: usize,
}

fn norm_series(traj: &Trajectory, scenario: &Scenario) -> Result<NormSeries> {
    let basis = SpectralBasis::new(scenario.domain, scenario.order)?;
    let window_steps = match math::nearest_integer(1.0 / traj.dt(), 1e-9) {
        Some(w) if w >= 1 => w as usize,
        _ => {
            return Err(Error::Invalid(format!(
                "unit windows need 1/Δt integral, got Δt = {}",
                traj.dt()
            )))
        }
    };
    if traj.len() <= window_steps {
        return Err(Error::HorizonTooShort {
            needed: 1.0,
            have: traj.end_time() - traj.start_time(),
        });
    }
    let mut h1_sq = Vec::with_capacity(traj.len());
    let mut dual_sq = Vec::with_capacity(traj.len());
    let mut l2 = Vec::with_capacity(traj.len());
    for node in traj.nodes() {
        h1_sq.push(basis.norm_sq(&node.field, 0.5)?);
        let mut dual = 0.0;
        for (k, (g, f)) in node
            .field
            .coeffs()
            .iter()
            .zip(node.rhs.coeffs())
            .enumerate()
        {
            let lambda = basis.eigenvalue(k + 1);
            let velocity = -(lambda + scenario.damping) * g + f;
            dual += velocity * velocity / lambda;
        }
        dual_sq.push(dual);
        l2.push(node.field.norm_l2());
    }
    Ok(NormSeries {
        h1_sq,
        dual_sq,
        l2,
        window_steps,
    })
}

/// Sliding unit-window integrals (composite trapezoid): entry `j` holds
/// `∫_{t_j}^{t_j + 1}`.
fn window_integrals(values: &[f64], dt: f64, window_steps: usize) -> Vec<f64> {
    let prefix = super::prefix_trapezoid(values, dt);
    (0..values.len() - window_steps)
        .map(|j| prefix[j + window_steps] - prefix[j])
        .collect()
}

fn suffix_max(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    for j in (0..out.len().saturating_sub(1)).rev() {
        out[j] = math::max(out[j], out[j + 1]);
    }
    out
}

/// Computes the bounded-window norm of a trajectory (horizon must cover at
/// least one unit window).
pub fn fb_norm(traj: &Trajectory, scenario: &Scenario) -> Result<FbNorm> {
    let series = norm_series(traj, scenario)?;
    let w1 = window_integrals(&series.h1_sq, traj.dt(), series.window_steps);
    let wd = window_integrals(&series.dual_sq, traj.dt(), series.window_steps);
    let h1_window = w1.iter().fold(0.0, |a, v| math::max(a, *v));
    let dual_window = wd.iter().fold(0.0, |a, v| math::max(a, *v));
    let sup_l2 = series.l2.iter().fold(0.0, |a, v| math::max(a, *v));
    Ok(FbNorm {
        h1_window,
        sup_l2,
        dual_window,
        total: h1_window + sup_l2 + dual_window,
    })
}

/// Time translation `T(h)w(·) = w(· + h)`: drops the first `h/Δt` nodes and
/// relabels times to start where the original did. `h` must be a
/// nonnegative grid-aligned shift strictly shorter than the horizon.
pub fn translate(traj: &Trajectory, h: f64) -> Result<Trajectory> {
    let steps = match math::nearest_integer(h / traj.dt(), 1e-9) {
        Some(k) if k >= 0 => k as usize,
        _ => {
            return Err(Error::MisalignedShift {
                shift: h,
                dt: traj.dt(),
            })
        }
    };
    if steps >= traj.len() {
        return Err(Error::HorizonTooShort {
            needed: h,
            have: traj.end_time() - traj.start_time(),
        });
    }
    Ok(Trajectory::from_parts(
        traj.start_time(),
        traj.dt(),
        traj.nodes()[steps..].to_vec(),
    ))
}

/// One ensemble member: a run at a specific Galerkin order, kernel index,
/// and initial amplitude, sharing all other physics with the base scenario.
#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub label: String,
    pub order: usize,
    pub kernel_index: usize,
    pub amplitude: f64,
    pub scenario: Scenario,
    pub trajectory: Trajectory,
}

/// A family of trajectories sharing scenario physics, time grid, and
/// horizon, varying Galerkin order, kernel index, and initial amplitude.
#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    pub members: Vec<EnsembleMember>,
}

impl TrajectoryEnsemble {
    /// Runs the grid `orders × kernel indices × amplitudes` of the base
    /// scenario in distributed mode with `u⁰ = amplitude·e₁` held as
    /// history. The physical grid is refined to at least `4m` interior
    /// points per member.
    pub fn generate(
        base: &Scenario,
        orders: &[usize],
        ns: &[usize],
        amplitudes: &[f64],
    ) -> Result<Self> {
        if orders.is_empty() || ns.is_empty() || amplitudes.is_empty() {
            return Err(Error::Invalid("ensemble axes must be non-empty".into()));
        }
        let mut members = Vec::new();
        for &order in orders {
            for &n in ns {
                for &amplitude in amplitudes {
                    let mut s = base.clone();
                    s.order = order;
                    let needed = 4 * order;
                    if s.domain.interior_points() < needed {
                        s.domain = Domain::new(s.domain.length(), needed)?;
                    }
                    s.mode = RhsMode::Distributed { n };
                    s.initial = InitialData {
                        u0: InitialField::Mode { k: 1, amplitude },
                        history: HistorySpec::Hold,
                    };
                    let trajectory = integrator::run(&s)?;
                    members.push(EnsembleMember {
                        label: format!("m={order} n={n} a={amplitude}"),
                        order,
                        kernel_index: n,
                        amplitude,
                        scenario: s,
                        trajectory,
                    });
                }
            }
        }
        Ok(TrajectoryEnsemble { members })
    }
}

/// Per-member outcome of the absorbing-ball check.
#[derive(Debug, Clone)]
pub struct MemberTail {
    pub label: String,
    pub order: usize,
    pub kernel_index: usize,
    pub amplitude: f64,
    /// Tail bounded-window norm (windows confined to the late part of the
    /// run).
    pub tail_norm: f64,
    /// First grid time at which the remaining-tail norm drops below the
    /// empirical radius (and stays there — the curve is non-increasing).
    pub entry_time: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct AbsorbingReport {
    pub record: CheckRecord,
    /// Empirical absorbing radius: largest tail norm across the ensemble.
    pub r1: f64,
    /// Relative spread of the per-(order, kernel) radii.
    pub spread: f64,
    pub tails: Vec<MemberTail>,
}

/// Verifies the absorbing-ball picture across an ensemble:
///
/// * the late-time windowed quantities of each member sit below the
///   `h → ∞` limits of the a-priori estimates —
///   `sup_{t late} ‖u‖² ≤ K²/(d(d+2λ₁))`,
///   `∫_h^{h+1}‖A^{1/2}u‖² ≤ d₁/γ₁` and
///   `∫_h^{h+1}‖A^{−1/2}u̇‖² ≤ d₃` for late `h`;
/// * the empirical radius `R₁` (largest tail norm) is essentially
///   independent of the Galerkin order and the kernel index: the spread of
///   the per-(m, n) radii stays within 10%;
/// * every member enters the ball of radius `R₁·(1 + 10⁻⁶)` and stays
///   (the remaining-tail norm curve is non-increasing by construction).
pub fn absorbing_check(ensemble: &TrajectoryEnsemble) -> Result<AbsorbingReport> {
    if ensemble.members.is_empty() {
        return Err(Error::Invalid("empty ensemble".into()));
    }
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut tails = Vec::with_capacity(ensemble.members.len());
    let mut curves = Vec::with_capacity(ensemble.members.len());

    for member in &ensemble.members {
        let traj = &member.trajectory;
        let c = derived_constants(&member.scenario);
        let series = norm_series(traj, &member.scenario)?;
        let w = series.window_steps;
        let w1 = suffix_max(&window_integrals(&series.h1_sq, traj.dt(), w));
        let wd = suffix_max(&window_integrals(&series.dual_sq, traj.dt(), w));
        let sup2: Vec<f64> = series.l2.iter().map(|v| v * v).collect();
        let l2s = suffix_max(&sup2);
        let l2 = suffix_max(&series.l2);
        // remaining-tail norm curve N(j): bounded-window norm of the run
        // restricted to [t_j, T]; non-increasing in j
        let curve: Vec<f64> = (0..w1.len()).map(|j| w1[j] + l2[j] + wd[j]).collect();

        // late-time cut: last quarter of the available windows
        let cut = ((curve.len() - 1) as f64 * 0.75) as usize;
        let tail_norm = curve[cut];

        // eventual bounds against the asymptotic limits
        pairs.push((l2s[cut], c.radius_sq));
        pairs.push((w1[cut], c.d1 / c.gamma1));
        pairs.push((wd[cut], c.d3));

        tails.push(MemberTail {
            label: member.label.clone(),
            order: member.order,
            kernel_index: member.kernel_index,
            amplitude: member.amplitude,
            tail_norm,
            entry_time: None,
        });
        curves.push(curve);
    }

    let r1 = tails.iter().map(|t| t.tail_norm).fold(0.0, math::max);
    let threshold = r1 * (1.0 + 1e-6);
    for (tail, curve) in tails.iter_mut().zip(&curves) {
        let entry = curve.iter().position(|n| *n <= threshold);
        tail.entry_time = entry.map(|j| {
            let traj = &ensemble.members[0].trajectory;
            traj.start_time() + j as f64 * traj.dt()
        });
        // every member must be absorbed
        let ok = if entry.is_some() { 0.0 } else { 1.0 };
        pairs.push((ok, 0.0));
    }

    // radius independence across (order, kernel index): for each group take
    // the worst amplitude, then compare groups
    let mut group_radii: Vec<((usize, usize), f64)> = Vec::new();
    for tail in &tails {
        let key = (tail.order, tail.kernel_index);
        match group_radii.iter_mut().find(|(k, _)| *k == key) {
            Some((_, r)) => *r = math::max(*r, tail.tail_norm),
            None => group_radii.push((key, tail.tail_norm)),
        }
    }
    let g_max = group_radii.iter().map(|(_, r)| *r).fold(0.0, math::max);
    let g_min = group_radii
        .iter()
        .map(|(_, r)| *r)
        .fold(f64::INFINITY, math::min);
    let spread = if g_max > 0.0 {
        (g_max - g_min) / g_max
    } else {
        0.0
    };
    pairs.push((spread, 0.10));

    let record = CheckRecord::from_bounds(
        "absorbing-ball",
        "late windows obey sup‖u‖² ≤ K²/(d(d+2λ₁)), ∫_h^{h+1}‖A^{1/2}u‖² ≤ d₁/γ₁, ∫_h^{h+1}‖A^{−1/2}u̇‖² ≤ d₃; R₁ spread over (m, n) ≤ 10%",
        &pairs,
        RELATIVE_SLACK,
    )
    .with_constant("R1", r1)
    .with_constant("spread", spread)
    .with_note(format!(
        "group radii {:?}",
        group_radii.iter().map(|(_, r)| *r).collect::<Vec<_>>()
    ));
    Ok(AbsorbingReport {
        record,
        r1,
        spread,
        tails,
    })
}

#[derive(Debug, Clone)]
pub struct AttractionReport {
    pub record: CheckRecord,
    /// Shift values probed (unit steps).
    pub shifts: Vec<f64>,
    /// Per member, the distance of its shifted unit segment to the
    /// candidate set, one value per shift.
    pub distances: Vec<Vec<f64>>,
    pub transient: f64,
    pub tolerance: f64,
}

/// Attraction surrogate: the candidate set is the collection of final
/// unit-window segments of the ensemble; for each member and each unit
/// shift `h`, measures
///
/// ```text
/// d(h) = min_candidate ( ∫₀¹ ‖u(h+s) − c(s)‖² ds )^{1/2}
/// ```
///
/// and checks that `d(h)` is non-increasing for `h` beyond the transient
/// and ends below the tolerance. With two or more members, a member's own
/// tail is excluded from its candidate set, so the final value measures
/// genuine cross-member convergence rather than a distance-to-self of
/// zero. This windowed strong distance is a sound (stricter) surrogate for
/// the local weak-star convergence in the attractor definition, which is
/// not directly computable.
pub fn attraction_diagnostic(
    ensemble: &TrajectoryEnsemble,
    transient: f64,
    tolerance: f64,
) -> Result<AttractionReport> {
    if ensemble.members.is_empty() {
        return Err(Error::Invalid("empty ensemble".into()));
    }
    let dt = ensemble.members[0].trajectory.dt();
    let window_steps = match math::nearest_integer(1.0 / dt, 1e-9) {
        Some(w) if w >= 1 => w as usize,
        _ => return Err(Error::Invalid("unit windows need 1/Δt integral".into())),
    };

    // candidate set: final unit windows
    let mut candidates: Vec<(&Trajectory, usize)> = Vec::new();
    for member in &ensemble.members {
        let len = member.trajectory.len();
        if len <= window_steps {
            return Err(Error::HorizonTooShort {
                needed: 1.0,
                have: len as f64 * dt,
            });
        }
        candidates.push((&member.trajectory, len - 1 - window_steps));
    }

    let mut shifts = Vec::new();
    let mut distances = Vec::new();
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for (mi, member) in ensemble.members.iter().enumerate() {
        let traj = &member.trajectory;
        let max_shift = traj.len() - 1 - window_steps;
        let mut d_of_h = Vec::new();
        let mut h_values = Vec::new();
        let mut j = 0;
        while j <= max_shift {
            let d = candidates
                .iter()
                .enumerate()
                .filter(|(ci, _)| candidates.len() == 1 || *ci != mi)
                .map(|(_, (c, jc))| window_distance(traj, j, c, *jc, window_steps, dt))
                .fold(f64::INFINITY, math::min);
            d_of_h.push(d);
            h_values.push(j as f64 * dt);
            j += window_steps;
        }
        // non-increasing beyond the transient, final value below tolerance
        for i in 0..d_of_h.len().saturating_sub(1) {
            if h_values[i] >= transient {
                pairs.push((d_of_h[i + 1], d_of_h[i]));
            }
        }
        pairs.push((d_of_h[d_of_h.len() - 1], tolerance));
        if shifts.is_empty() {
            shifts = h_values;
        }
        distances.push(d_of_h);
    }

    let record = CheckRecord::from_bounds(
        "attraction-surrogate",
        "min over candidates of (∫₀¹‖u(h+s) − c(s)‖²ds)^{1/2} is non-increasing in h beyond the transient and ends below tolerance",
        &pairs,
        1e-6,
    )
    .with_constant("tolerance", tolerance)
    .with_constant("transient", transient);
    Ok(AttractionReport {
        record,
        shifts,
        distances,
        transient,
        tolerance,
    })
}

/// `(∫ over one window of ‖a(t_{ja}+s) − b(t_{jb}+s)‖² ds)^{1/2}` by
/// composite trapezoid on the shared grid (orders may differ; coefficients
/// are zero-padded).
fn window_distance(
    a: &Trajectory,
    ja: usize,
    b: &Trajectory,
    jb: usize,
    window_steps: usize,
    dt: f64,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..=window_steps {
        let d = a.node(ja + i).field.l2_distance(&b.node(jb + i).field);
        let w = if i == 0 || i == window_steps { 0.5 } else { 1.0 };
        acc += w * d * d;
    }
    math::sqrt(acc * dt)
}
