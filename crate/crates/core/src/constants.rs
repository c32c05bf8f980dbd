//! Implementation constants. Each one was measured once against the test suites and
//! then frozen; change them only together with the tests that pin them.

/// Linial reduction ends with at most `LINIAL_BETA * Δ^2` colors.
pub const LINIAL_BETA: u64 = 9;

/// Linial edge coloring of a graph with maximum degree `k` uses at most
/// `EDGE_LINIAL_BETA * k^2` colors (line-graph degree ≤ 2k−2, so `9(2k−2)^2 < 36k^2`).
pub const EDGE_LINIAL_BETA: u64 = 4 * LINIAL_BETA;

/// Linial reduction from `n` ids takes at most `LINIAL_ROUNDS_C * log* n` rounds.
pub const LINIAL_ROUNDS_C: usize = 2;

/// Ruling sets on paths take at most `RULING_ROUNDS_C * k * (log* n + 1)` rounds.
pub const RULING_ROUNDS_C: usize = 80;

/// Path compression threshold in the two-part decomposition: `ℓ = ELL_FACTOR * k`.
pub const ELL_FACTOR: usize = 20;

/// Two-part decomposition diameter bound: `TWO_PART_C * (k * ceil(log2 s) + d + 1)`.
pub const TWO_PART_C: usize = 100;

/// Mixed decomposition requires `λ ≥ MIXED_LAMBDA_C * k`.
pub const MIXED_LAMBDA_C: usize = 3;

/// Class budget of the mixed decomposition, `MIXED_BETA_PRIME * λ^2`. Linial gives
/// `LINIAL_BETA * Δ̃^2` classes for marked-graph degree Δ̃, so the budget holds whenever
/// Δ̃ < 2λ.
pub const MIXED_BETA_PRIME: u64 = 36;

/// Diameter bound of the unmarked part of the mixed decomposition, in `T`:
/// `MIXED_C * k * (log_{λ/k} s + d/k + 1)`.
pub const MIXED_C: usize = 100;

/// Contagion depth `τ = ceil(TAU_C * log_μ max(log2 n, 2))`.
pub const TAU_C: f64 = 4.0;

/// Smallness bound: dominating sets of at most `SMALL_C * log2 n` vertices.
pub const SMALL_C: f64 = 8.0;

/// Oriented-tree (Δ+1)-coloring uses at most
/// `ORIENTED_ROUNDS_C * (log* n + 1) + 4 * LINIAL_BETA` rounds; the second term covers the
/// one-class-per-round reduction of the path coloring to 3 colors.
pub const ORIENTED_ROUNDS_C: usize = 3;

/// Default enumeration cap for exact event probabilities.
pub const ENUMERATION_CAP: u64 = 1 << 24;

/// Monte Carlo samples when the cap is exceeded.
pub const MONTE_CARLO_SAMPLES: usize = 1_000_000;

/// Largest Δ accepted by the exact zero-round computation.
pub const ZERO_ROUND_MAX_DELTA: usize = 14;

/// Default number of top gadget layers held fixed by the forced-recoloring check.
pub const FROZEN_TOP_DEFAULT: usize = 6;

/// Largest number of free edges the exhaustive completion search accepts.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 18;

/// Largest gadget `build_gstar` materializes.
pub const GADGET_VERTEX_CAP: usize = 5_000_000;
