/// Truncation, quadrature and tolerance settings shared by the field modules
/// and the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericsPolicy {
    /// Relative tail tolerance for Matsubara sums.
    pub matsubara_tol: f64,
    /// Hard cap on the Matsubara index.
    pub l_max: u64,
    /// Finite-difference step as a fraction of T.
    pub fd_rel_step: f64,
    /// Gauss-Legendre order per panel for radial (1D) reductions.
    pub radial_order: usize,
    /// Gauss-Legendre order per axis for the angular sphere-pair oracle.
    pub angular_order: usize,
    /// Node counts per axis for planar bodies (radial, angular for disks).
    pub planar_order: (usize, usize),
    pub mc_samples: u64,
    pub mc_seed: u64,
    /// Tolerance for U = E + T S checks.
    pub consistency_tol: f64,
}

impl Default for NumericsPolicy {
    fn default() -> Self {
        Self {
            matsubara_tol: 1e-15,
            l_max: 100_000,
            fd_rel_step: 1e-4,
            radial_order: 32,
            angular_order: 64,
            planar_order: (16, 32),
            mc_samples: 10_000_000,
            mc_seed: 0x5eed_ca51_u64,
            consistency_tol: 1e-6,
        }
    }
}

impl NumericsPolicy {
    pub fn fd_step(&self, temperature: f64) -> f64 {
        self.fd_rel_step * temperature
    }
}
