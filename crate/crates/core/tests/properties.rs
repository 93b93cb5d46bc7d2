//! Property tests: randomized invariants of the transform pair, the delay
//! kernels, the history buffer, and the exponential stepper.

use proptest::prelude::*;

use sddsim_core::delay::{kernel_l1_diff, make_step_kernel, DelayLaw, EpsilonSequence};
use sddsim_core::history::{dist_h, HistorySegment};
use sddsim_core::integrator::{self, HistorySpec, InitialData, InitialField, RhsMode, Scenario};
use sddsim_core::rhs::{Nonlinearity, SpatialKernel};
use sddsim_core::spectral::{Domain, SpectralBasis, SpectralField};

fn coeff_vec(order: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-10.0..10.0f64, order)
}

/// A random ramped history `φ(θ) = base + θ·dir` over span 1 on a 1/16 grid.
fn ramp_history(base: Vec<f64>, dir: Vec<f64>) -> HistorySegment {
    let base = SpectralField::from_coeffs(base);
    let dir = SpectralField::from_coeffs(dir);
    let phi = |theta: f64| base.add_scaled(theta, &dir);
    HistorySegment::init_from_initial_data(phi(0.0), phi, 1.0, 1.0 / 16.0).unwrap()
}

proptest! {
    /// Synthesis followed by analysis returns the coefficients (the grid
    /// carries at least four points per retained mode, so the discrete sine
    /// transform is orthogonal to rounding).
    #[test]
    fn prop_transform_round_trip(
        order in 1usize..=8,
        extra in 0usize..8,
        length in 0.5..8.0f64,
        seed in proptest::collection::vec(-10.0..10.0f64, 8),
    ) {
        let coeffs: Vec<f64> = seed[..order].to_vec();
        let domain = Domain::new(length, 4 * order + extra).unwrap();
        let basis = SpectralBasis::new(domain, order).unwrap();
        let field = SpectralField::from_coeffs(coeffs.clone());
        let grid = basis.to_physical(&field).unwrap();
        let back = basis.to_spectral(&grid).unwrap();
        for (a, b) in coeffs.iter().zip(back.coeffs()) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    /// The trapezoid rule on the synthesis grid reproduces the coefficient
    /// sum of squares (a discrete Parseval identity).
    #[test]
    fn prop_parseval_on_grid(
        order in 1usize..=8,
        length in 0.5..8.0f64,
        seed in proptest::collection::vec(-10.0..10.0f64, 8),
    ) {
        let coeffs: Vec<f64> = seed[..order].to_vec();
        let domain = Domain::new(length, 4 * order).unwrap();
        let basis = SpectralBasis::new(domain, order).unwrap();
        let field = SpectralField::from_coeffs(coeffs.clone());
        let grid = basis.to_physical(&field).unwrap();
        let squared: Vec<f64> = grid.iter().map(|v| v * v).collect();
        let integral = domain.trapezoid(&squared);
        let sum_sq: f64 = coeffs.iter().map(|g| g * g).sum();
        prop_assert!((integral - sum_sq).abs() <= 1e-9 * (1.0 + sum_sq));
    }

    /// Fractional powers of `A` compose to the identity on coefficients.
    #[test]
    fn prop_apply_power_inverse(
        order in 1usize..=8,
        length in 0.5..8.0f64,
        alpha in -1.0..1.0f64,
        seed in proptest::collection::vec(-10.0..10.0f64, 8),
    ) {
        let coeffs: Vec<f64> = seed[..order].to_vec();
        let domain = Domain::new(length, 4 * order).unwrap();
        let basis = SpectralBasis::new(domain, order).unwrap();
        let field = SpectralField::from_coeffs(coeffs.clone());
        let up = basis.apply_power(&field, alpha).unwrap();
        let down = basis.apply_power(&up, -alpha).unwrap();
        for (a, b) in coeffs.iter().zip(down.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }

    /// Every step kernel built from a random state has unit mass to 10⁻¹²
    /// and support inside the history span.
    #[test]
    fn prop_kernel_mass_and_support(
        eta_max in 0.05..0.4f64,
        c0 in -2.0..2.0f64,
        c1 in 0.0..1.0f64,
        c2 in 0.0..1.0f64,
        n in 1usize..=5,
        base in coeff_vec(6),
        dir in coeff_vec(6),
    ) {
        let law = DelayLaw::sigmoid_energy(eta_max, c0, c1, c2).unwrap();
        let seq = EpsilonSequence::new(0.125).unwrap();
        let history = ramp_history(base, dir);
        let kernel = make_step_kernel(&seq, n, &law, history.latest_field(), &history).unwrap();
        prop_assert!((kernel.mass() - 1.0).abs() <= 1e-12);
        let (lo, hi) = kernel.support();
        prop_assert!(lo >= -1.0 && hi <= 0.0, "support ({lo}, {hi})");
    }

    /// The sigmoid delay law is Lipschitz with constant
    /// `(η_max·M/2)·hypot(c₁, c₂)` on the ball of radius `M`, and the
    /// kernels it produces satisfy the L¹ estimate with constant
    /// `2 ε_n⁻¹ L_{η,M}`.
    #[test]
    fn prop_delay_lipschitz_and_kernel_l1(
        eta_max in 0.05..0.4f64,
        c0 in -2.0..2.0f64,
        c1 in 0.0..1.0f64,
        c2 in 0.0..1.0f64,
        n in 1usize..=4,
        base1 in coeff_vec(6),
        dir1 in coeff_vec(6),
        base2 in coeff_vec(6),
        dir2 in coeff_vec(6),
    ) {
        let law = DelayLaw::sigmoid_energy(eta_max, c0, c1, c2).unwrap();
        let seq = EpsilonSequence::new(0.125).unwrap();
        let h1 = ramp_history(base1, dir1);
        let h2 = ramp_history(base2, dir2);
        let a1 = h1.latest_field().clone();
        let a2 = h2.latest_field().clone();

        let radius = |a: &SpectralField, h: &HistorySegment| -> f64 {
            let state_sq = a.norm_l2() * a.norm_l2();
            (state_sq + h.segment_norm_sq(h.latest_time()).unwrap()).sqrt()
        };
        let m = radius(&a1, &h1).max(radius(&a2, &h2));
        let dist = dist_h(&a1, &h1, &a2, &h2).unwrap();

        let eta1 = law.eta_eval(&a1, &h1).unwrap();
        let eta2 = law.eta_eval(&a2, &h2).unwrap();
        let l_eta = law.lipschitz_bound(m);
        prop_assert!(
            (eta1 - eta2).abs() <= l_eta * dist + 1e-12,
            "|Δη| = {} > {} · {}",
            (eta1 - eta2).abs(), l_eta, dist
        );

        let k1 = make_step_kernel(&seq, n, &law, &a1, &h1).unwrap();
        let k2 = make_step_kernel(&seq, n, &law, &a2, &h2).unwrap();
        let diff = kernel_l1_diff(&k1, &k2).unwrap();
        let eps = seq.value(n).unwrap();
        prop_assert!(diff <= 2.0 / eps * l_eta * dist + 1e-10);
    }

    /// Between grid nodes the history interpolates linearly: the midpoint
    /// value is the average of the neighbors, and node evaluations return
    /// the stored fields exactly.
    #[test]
    fn prop_history_interpolation(
        base in coeff_vec(6),
        dir in coeff_vec(6),
        j in 0usize..16,
    ) {
        let history = ramp_history(base, dir);
        let dt = 1.0 / 16.0;
        let t_node = -1.0 + j as f64 * dt;
        let stored = history.eval(t_node).unwrap();
        let next = history.eval(t_node + dt).unwrap();
        let mid = history.eval(t_node + 0.5 * dt).unwrap();
        for ((s, n), m) in stored.coeffs().iter().zip(next.coeffs()).zip(mid.coeffs()) {
            prop_assert!((0.5 * (s + n) - m).abs() <= 1e-12 * (1.0 + s.abs() + n.abs()));
        }
    }

    /// With the reaction off, each mode decays by the exact factor
    /// `e^{−(λ_k+d)t}` whatever the damping, mode, and amplitude.
    #[test]
    fn prop_linear_decay_exactness(
        damping in 0.1..5.0f64,
        k in 1usize..=4,
        amplitude in 0.1..10.0f64,
    ) {
        let scenario = Scenario {
            domain: Domain::new(std::f64::consts::PI, 16).unwrap(),
            order: 4,
            damping,
            delay_span: 0.25,
            dt: 1.0 / 32.0,
            horizon: 1.0,
            nonlinearity: Nonlinearity::Zero,
            spatial: SpatialKernel::constant(1.0).unwrap(),
            law: DelayLaw::constant(0.1).unwrap(),
            mode: RhsMode::Discrete,
            eps: EpsilonSequence::new(0.0625).unwrap(),
            initial: InitialData {
                u0: InitialField::Mode { k, amplitude },
                history: HistorySpec::Hold,
            },
        };
        let basis = SpectralBasis::new(scenario.domain, scenario.order).unwrap();
        let mu = basis.eigenvalue(k) + damping;
        let traj = integrator::run(&scenario).unwrap();
        for j in 0..traj.len() {
            let expected = amplitude * (-mu * traj.time(j)).exp();
            let got = traj.node(j).field.norm_l2();
            prop_assert!((got - expected).abs() <= 1e-9 * (1.0 + expected));
        }
    }
}
