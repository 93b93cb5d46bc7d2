//! Dirichlet-Laplacian eigenbasis on an interval and spectral fields.
//!
//! The operator is `A = -d²/dx²` with homogeneous Dirichlet conditions on
//! `Ω = (0, L)`. Its eigenpairs are analytic:
//!
//! ```text
//! e_k(x) = sqrt(2/L) · sin(kπx/L),      λ_k = (kπ/L)²,     k = 1, 2, …
//! ```
//!
//! A field of order `m` is the coefficient vector `g` of
//! `u(x) = Σ_{k=1..m} g_k e_k(x)`. Norms of fractional powers are diagonal:
//!
//! ```text
//! ‖A^α u‖² = Σ_k λ_k^{2α} g_k²        (Parseval; α = 0 is the L² norm)
//! ```
//!
//! Physical-space work (pointwise nonlinearities, convolutions) happens on a
//! uniform grid of `N_x` interior nodes plus the two boundary nodes, with
//! composite-trapezoid quadrature. On that grid the sampled sine modes are
//! *exactly* discretely orthonormal for `k ≤ N_x`, so the forward/inverse
//! transforms below round-trip to machine precision. The basis enforces
//! `N_x ≥ 4m` so products of a field with `b(u)`-type nonlinearities stay
//! resolved (anti-aliasing).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// The spatial interval `Ω = (0, L)` with its uniform quadrature grid.
///
/// `interior_points` counts interior nodes; the full grid also carries the
/// two boundary nodes, so node `j` sits at `x_j = j·L/(N_x+1)` for
/// `j = 0..N_x+1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    length: f64,
    interior_points: usize,
}

impl Domain {
    pub fn new(length: f64, interior_points: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Invalid(format!(
                "domain length must be positive and finite, got {length}"
            )));
        }
        if interior_points == 0 {
            return Err(Error::Invalid(
                "domain needs at least one interior grid point".into(),
            ));
        }
        Ok(Domain {
            length,
            interior_points,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn interior_points(&self) -> usize {
        self.interior_points
    }

    /// Grid spacing `h = L/(N_x+1)`.
    pub fn spacing(&self) -> f64 {
        self.length / (self.interior_points + 1) as f64
    }

    /// Number of grid nodes including both boundary nodes.
    pub fn grid_len(&self) -> usize {
        self.interior_points + 2
    }

    /// Coordinate of grid node `j`, `j = 0..grid_len()`.
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// Composite-trapezoid quadrature of nodal values over `[0, L]`.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.grid_len());
        let n = values.len();
        let mut acc = 0.5 * (values[0] + values[n - 1]);
        for v in &values[1..n - 1] {
            acc += v;
        }
        acc * self.spacing()
    }
}

/// Evaluation tables and eigenvalues for the first `m` Dirichlet sine modes.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    domain: Domain,
    eigenvalues: Vec<f64>,
    /// `modes[k-1]` is `e_k` sampled on the full grid (zero at both ends).
    modes: Vec<Vec<f64>>,
}

impl SpectralBasis {
    /// Builds the basis of order `m`. Rejects `m < 1` and grids with fewer
    /// than `4m` interior nodes.
    pub fn new(domain: Domain, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::Invalid("basis order must be at least 1".into()));
        }
        if domain.interior_points() < 4 * order {
            return Err(Error::Invalid(format!(
                "grid too coarse: {} interior points for order {} (need N_x >= 4m)",
                domain.interior_points(),
                order
            )));
        }
        let length = domain.length();
        let scale = math::sqrt(2.0 / length);
        let mut eigenvalues = Vec::with_capacity(order);
        let mut modes = Vec::with_capacity(order);
        for k in 1..=order {
            let freq = k as f64 * core::f64::consts::PI / length;
            eigenvalues.push(freq * freq);
            let mut table: Vec<f64> = (0..domain.grid_len())
                .map(|j| scale * math::sin(freq * domain.node(j)))
                .collect();
            // e_k vanishes at both boundaries analytically; pin the samples
            // so synthesized fields are exactly Dirichlet on the grid.
            table[0] = 0.0;
            let last = table.len() - 1;
            table[last] = 0.0;
            modes.push(table);
        }
        Ok(SpectralBasis {
            domain,
            eigenvalues,
            modes,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn order(&self) -> usize {
        self.modes.len()
    }

    /// Eigenvalue `λ_k` for mode `k` (1-based).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    /// All eigenvalues, entry `i` holding `λ_{i+1}`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Nodal table of mode `k` (1-based) on the full grid.
    pub fn mode(&self, k: usize) -> &[f64] {
        &self.modes[k - 1]
    }

    fn check_order(&self, field: &SpectralField) -> Result<()> {
        if field.order() != self.order() {
            return Err(Error::DimensionMismatch {
                expected: self.order(),
                got: field.order(),
            });
        }
        Ok(())
    }

    /// Applies `A^α` diagonally: coefficient `k` becomes `λ_k^α g_k`.
    pub fn apply_power(&self, field: &SpectralField, alpha: f64) -> Result<SpectralField> {
        self.check_order(field)?;
        let coeffs = field
            .coeffs()
            .iter()
            .zip(&self.eigenvalues)
            .map(|(g, lam)| math::powf(*lam, alpha) * g)
            .collect();
        Ok(SpectralField::from_coeffs(coeffs))
    }

    /// `‖A^α u‖ = (Σ λ_k^{2α} g_k²)^{1/2}`.
    pub fn norm(&self, field: &SpectralField, alpha: f64) -> Result<f64> {
        Ok(math::sqrt(self.norm_sq(field, alpha)?))
    }

    /// `‖A^α u‖²` without the square root.
    pub fn norm_sq(&self, field: &SpectralField, alpha: f64) -> Result<f64> {
        self.check_order(field)?;
        let mut acc = 0.0;
        for (g, lam) in field.coeffs().iter().zip(&self.eigenvalues) {
            acc += math::powf(*lam, 2.0 * alpha) * g * g;
        }
        Ok(acc)
    }

    /// Synthesizes nodal values on the full grid (zero at both boundaries).
    pub fn to_physical(&self, field: &SpectralField) -> Result<Vec<f64>> {
        self.check_order(field)?;
        let mut values = vec![0.0; self.domain.grid_len()];
        for (g, table) in field.coeffs().iter().zip(&self.modes) {
            if *g == 0.0 {
                continue;
            }
            for (v, e) in values.iter_mut().zip(table) {
                *v += g * e;
            }
        }
        Ok(values)
    }

    /// Projects nodal values onto the basis: `g_k = quadrature(w · e_k)`.
    pub fn to_spectral(&self, values: &[f64]) -> Result<SpectralField> {
        if values.len() != self.domain.grid_len() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.grid_len(),
                got: values.len(),
            });
        }
        let h = self.domain.spacing();
        let coeffs = self
            .modes
            .iter()
            .map(|table| {
                // e_k vanishes at both ends, so the trapezoid reduces to the
                // interior sum.
                let mut acc = 0.0;
                for (v, e) in values[1..values.len() - 1]
                    .iter()
                    .zip(&table[1..table.len() - 1])
                {
                    acc += v * e;
                }
                acc * h
            })
            .collect();
        Ok(SpectralField::from_coeffs(coeffs))
    }
}

/// Coefficient vector of a field in the Dirichlet eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zero(order: usize) -> Self {
        SpectralField {
            coeffs: vec![0.0; order],
        }
    }

    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        SpectralField { coeffs }
    }

    /// The unit field `e_k` (1-based mode index) of the given order.
    pub fn unit_mode(order: usize, k: usize) -> Self {
        let mut coeffs = vec![0.0; order];
        coeffs[k - 1] = 1.0;
        SpectralField { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// L² norm by Parseval, no basis needed.
    pub fn norm_l2(&self) -> f64 {
        math::sqrt(self.coeffs.iter().map(|g| g * g).sum())
    }

    pub fn scaled(&self, s: f64) -> Self {
        SpectralField {
            coeffs: self.coeffs.iter().map(|g| s * g).collect(),
        }
    }

    /// `self + s·other`; the shorter coefficient vector is zero-padded.
    pub fn add_scaled(&self, s: f64, other: &SpectralField) -> Self {
        let order = self.order().max(other.order());
        let mut coeffs = vec![0.0; order];
        for (c, g) in coeffs.iter_mut().zip(&self.coeffs) {
            *c = *g;
        }
        for (c, g) in coeffs.iter_mut().zip(&other.coeffs) {
            *c += s * g;
        }
        SpectralField { coeffs }
    }

    /// L² distance `‖self − other‖`; orders may differ (zero-padding).
    pub fn l2_distance(&self, other: &SpectralField) -> f64 {
        let longest = self.order().max(other.order());
        let mut acc = 0.0;
        for i in 0..longest {
            let a = self.coeffs.get(i).copied().unwrap_or(0.0);
            let b = other.coeffs.get(i).copied().unwrap_or(0.0);
            acc += (a - b) * (a - b);
        }
        math::sqrt(acc)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|g| g.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi_domain(n_x: usize) -> Domain {
        Domain::new(core::f64::consts::PI, n_x).unwrap()
    }

    #[test]
    fn eigenvalues_on_pi_interval() {
        let basis = SpectralBasis::new(pi_domain(64), 8).unwrap();
        assert!((basis.eigenvalue(1) - 1.0).abs() < 1e-14);
        assert!((basis.eigenvalue(3) - 9.0).abs() < 1e-13);
        // strictly increasing spectrum
        for k in 1..basis.order() {
            assert!(basis.eigenvalue(k) < basis.eigenvalue(k + 1));
        }
    }

    #[test]
    fn discrete_orthonormality() {
        let domain = pi_domain(64);
        let basis = SpectralBasis::new(domain, 8).unwrap();
        let mut worst: f64 = 0.0;
        for j in 1..=8 {
            for k in 1..=8 {
                let product: Vec<f64> = basis
                    .mode(j)
                    .iter()
                    .zip(basis.mode(k))
                    .map(|(a, b)| a * b)
                    .collect();
                let q = domain.trapezoid(&product);
                let expected = if j == k { 1.0 } else { 0.0 };
                worst = math::max(worst, math::abs(q - expected));
            }
        }
        assert!(worst < 1e-10, "orthonormality defect {worst}");
    }

    #[test]
    fn rejects_undersized_grid_and_zero_order() {
        assert!(SpectralBasis::new(pi_domain(31), 8).is_err());
        assert!(SpectralBasis::new(pi_domain(64), 0).is_err());
    }

    #[test]
    fn apply_power_identity_and_inverse() {
        let basis = SpectralBasis::new(pi_domain(64), 8).unwrap();
        let f = SpectralField::from_coeffs(vec![0.3, -1.2, 0.0, 2.5, 0.1, 0.0, 0.7, -0.2]);
        let same = basis.apply_power(&f, 0.0).unwrap();
        assert_eq!(same, f);

        // λ₁ = 1 on (0, π), so e₁ is fixed by any power.
        let e1 = SpectralField::unit_mode(8, 1);
        let half = basis.apply_power(&e1, 0.5).unwrap();
        assert!((half.coeffs()[0] - 1.0).abs() < 1e-15);

        let back = basis
            .apply_power(&basis.apply_power(&f, 0.5).unwrap(), -0.5)
            .unwrap();
        assert!(f.l2_distance(&back) < 1e-12);
    }

    #[test]
    fn norms_match_hand_sums() {
        let basis = SpectralBasis::new(pi_domain(64), 8).unwrap();
        assert_eq!(SpectralField::zero(8).norm_l2(), 0.0);

        let mut f = SpectralField::zero(8);
        f.coeffs_mut()[0] = 3.0;
        f.coeffs_mut()[1] = 4.0;
        assert!((f.norm_l2() - 5.0).abs() < 1e-15);

        // g = (1, 1, 0, …) with λ = (1, 4, …): ‖A^{1/2}u‖ = sqrt(1 + 4)
        let mut g = SpectralField::zero(8);
        g.coeffs_mut()[0] = 1.0;
        g.coeffs_mut()[1] = 1.0;
        let h1 = basis.norm(&g, 0.5).unwrap();
        assert!((h1 - math::sqrt(5.0)).abs() < 1e-14);
    }

    #[test]
    fn half_power_norm_dominates_l2_by_lambda_1() {
        let basis = SpectralBasis::new(pi_domain(64), 8).unwrap();
        let f = SpectralField::from_coeffs(vec![0.5, -0.4, 1.1, 0.0, 0.3, -2.0, 0.05, 0.9]);
        let lhs = basis.norm_sq(&f, 0.5).unwrap();
        let rhs = basis.lambda_1() * f.norm_l2() * f.norm_l2();
        assert!(lhs >= rhs - 1e-12);
    }

    #[test]
    fn transform_round_trip_single_mode() {
        let domain = pi_domain(64);
        let basis = SpectralBasis::new(domain, 8).unwrap();
        let e1 = SpectralField::unit_mode(8, 1);
        let grid = basis.to_physical(&e1).unwrap();
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[grid.len() - 1], 0.0);
        let back = basis.to_spectral(&grid).unwrap();
        assert!(e1.l2_distance(&back) < 1e-10);

        let zero = SpectralField::zero(8);
        let zgrid = basis.to_physical(&zero).unwrap();
        assert!(zgrid.iter().all(|v| *v == 0.0));
        assert_eq!(basis.to_spectral(&zgrid).unwrap(), zero);
    }

    #[test]
    fn parseval_on_grid() {
        let domain = pi_domain(128);
        let basis = SpectralBasis::new(domain, 32).unwrap();
        let coeffs: Vec<f64> = (0..32).map(|i| math::sin(1.7 * i as f64 + 0.3)).collect();
        let f = SpectralField::from_coeffs(coeffs);
        let grid = basis.to_physical(&f).unwrap();
        let sq: Vec<f64> = grid.iter().map(|v| v * v).collect();
        let quad = domain.trapezoid(&sq);
        let parseval = f.norm_l2() * f.norm_l2();
        assert!((quad - parseval).abs() < 1e-8);
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let basis = SpectralBasis::new(pi_domain(64), 8).unwrap();
        let wrong = SpectralField::zero(9);
        assert!(matches!(
            basis.to_physical(&wrong),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(basis.to_spectral(&[0.0; 10]).is_err());
    }
}
