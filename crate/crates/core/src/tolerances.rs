//! Every numerical threshold used by the checks, in one place.
//!
//! Checks never compare against bare literals; they pull a constant from
//! here and record it in the emitted [`CheckReport`](crate::report::CheckReport).

/// Largest ambient dimension for which vertex enumeration, hulls and
/// triangulations are attempted.
pub const EXACT_DIM_CAP: usize = 6;

/// Largest dimension supported by the Monte Carlo paths.
pub const MC_DIM_CAP: usize = 10;

/// Generator cap for the exact zonotope determinant-sum volume.
pub const ZONOTOPE_GENERATOR_CAP: usize = 20;

/// Vertex symmetry is checked to this distance at construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Linear maps with `|det|` below this are rejected.
pub const MIN_ABS_DET: f64 = 1e-10;

/// Incidence test (`<u, v> = 1`) and feasibility slack inside hulls.
pub const HULL_TOL: f64 = 1e-9;

/// Simplices with `|det|/n!` below this are skipped when triangulating.
pub const DEGENERATE_SIMPLEX: f64 = 1e-14;

/// Bipolarity: max sampled gauge deviation between K and K**.
pub const BIPOLAR_TOL: f64 = 1e-7;

/// Support/gauge duality on sampled directions.
pub const DUALITY_TOL: f64 = 1e-9;

/// Relative tolerance for closed-form (exact-path) equalities.
pub const CLOSED_FORM_REL: f64 = 1e-7;

/// Relative tolerance for exact Mahler equalities (cubes, cross-polytopes).
pub const MAHLER_EXACT_REL: f64 = 1e-9;

/// Mahler product invariance under linear maps and polarity, exact paths.
pub const INVARIANCE_REL: f64 = 1e-6;

/// Width of Monte Carlo acceptance bands, in standard errors.
pub const MC_SIGMAS: f64 = 4.0;

/// Brunn concavity: allowed violation in propagated standard errors.
pub const BRUNN_SIGMAS: f64 = 3.0;

/// Absolute slack in the one-dimensional lemma inequalities.
pub const LEMMA34_ABS: f64 = 1e-9;

/// Sampled hypothesis check of the three-function lemma (relative).
pub const LEMMA52_HYPOTHESIS_REL: f64 = 1e-12;

/// Conclusion of the three-function lemma (relative).
pub const LEMMA52_CONCLUSION_REL: f64 = 1e-9;

/// Witness value for the `rho` functional, cube bodies.
pub const RHO_CUBE_REL: f64 = 1e-6;

/// Radial quadrature of the ball witness.
pub const RHO_BALL_ABS: f64 = 1e-4;

/// Integral and lattice sums in the `eta` cube check.
pub const ETA_TOL: f64 = 1e-9;

/// Lattice terms at nonzero integers must vanish to this magnitude.
pub const LATTICE_ZERO: f64 = 1e-15;

/// Poisson summation: allowed difference beyond the analytic tail bound.
pub const POISSON_ABS: f64 = 1e-9;

/// Plancherel: relative difference of the two L2 norms.
pub const PLANCHEREL_REL: f64 = 1e-9;

/// Equality flag for grid-quadrature functional results (relative).
pub const GRID_EQUALITY_REL: f64 = 1e-3;

/// Equality flag for closed-form functional results (relative).
pub const CLOSED_FORM_EQUALITY_REL: f64 = 1e-7;

/// Functional Ball inequality on the grid (relative).
pub const FUNCTIONAL_BALL_REL: f64 = 1e-2;

/// Grid boundary mass allowed, as a fraction of the total mass.
pub const GRID_TAIL_FRACTION: f64 = 1e-4;

/// Sup error of a grid polar must stay below this many grid spacings.
pub const POLAR_GRID_FACTOR: f64 = 5.0;

/// Error ratio required when the grid spacing halves.
pub const GRID_HALVING_RATIO: f64 = 0.6;

/// Sup errors below this are treated as exact (round-off floor).
pub const GRID_ERROR_FLOOR: f64 = 1e-12;

/// Validity tolerance for Banach-Mazur certificates.
pub const BM_CERT_TOL: f64 = 1e-9;

/// Unconditionality: allowed gauge difference under sign flips.
pub const UNCONDITIONAL_TOL: f64 = 1e-9;
