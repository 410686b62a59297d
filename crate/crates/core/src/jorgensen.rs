//! Membership in the Jørgensen set `Λ_R`: analytic classification and its
//! numerical certification.
//!
//! The classification is a two-branch theorem. For `R ≤ 1` the member set is
//! `(0, ∞) × [1, ∞)`; for `R > 1` it is `ℕ × (0, ∞)`. Integer `x` makes every
//! series term nonnegative (a plain binomial-Gamma mixture) in *both*
//! regimes, so the classifier counts `ℕ × (0, 1)` with `R ≤ 1` as members as
//! well — a sliver the literal statement of case a) omits but its own proof
//! technique covers. [`literal_member`] reproduces the literal reading for
//! comparison.
//!
//! `classify` and `strip_zero` are pure. `positivity_scan` parallelizes over
//! grid points with no shared mutable state and reduces associatively
//! (min + argmin), so its result is deterministic under any scheduling.

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::{
    DensityEvaluator, EvalProfile, MixtureParams, PowerPair,
};
use crate::scalar::{real, Real};
use crate::{Error, Result};

/// Which side of the classification a pair landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MembershipBranch {
    /// `R ≤ 1`, `y ≥ 1`: member by case a).
    #[serde(rename = "R_LE_1_Y_GE_1")]
    RLe1YGe1,
    /// Integer `x`: member in both regimes (binomial mixture).
    #[serde(rename = "INTEGER_X")]
    IntegerX,
    /// `R > 1` with non-integer `x`: excluded by the strip-zero obstruction.
    #[serde(rename = "R_GT_1_NONINTEGER")]
    RGt1NonInteger,
    /// `R ≤ 1`, `y < 1`, non-integer `x`: excluded by the divergence at `k₀+1`.
    #[serde(rename = "R_LE_1_Y_LT_1_NONINTEGER")]
    RLe1YLt1NonInteger,
}

/// Which clause of the two-branch theorem decided the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremCase {
    /// Case a): `R ≤ 1`.
    #[serde(rename = "A")]
    A,
    /// Case b): `R > 1`.
    #[serde(rename = "B")]
    B,
    /// Integer `x`, `R ≤ 1`, `y < 1`: provable member beyond the literal
    /// statement of case a).
    #[serde(rename = "BEYOND_LITERAL")]
    BeyondLiteral,
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MembershipVerdict {
    pub member: bool,
    pub branch: MembershipBranch,
    pub theorem_case: TheoremCase,
}

/// Decide `Λ_R` membership: member iff `x` is a positive integer or
/// (`R ≤ 1` and `y ≥ 1`). Depends on `(r, λ)` only through `R`.
pub fn classify<T: Real>(p: &MixtureParams<T>, pw: &PowerPair<T>) -> MembershipVerdict {
    let r_le_one = p.r_le_one();
    if pw.is_integer_x() {
        let theorem_case = if !r_le_one {
            TheoremCase::B
        } else if pw.y() >= T::one() {
            TheoremCase::A
        } else {
            TheoremCase::BeyondLiteral
        };
        return MembershipVerdict {
            member: true,
            branch: MembershipBranch::IntegerX,
            theorem_case,
        };
    }
    if r_le_one {
        if pw.y() >= T::one() {
            MembershipVerdict {
                member: true,
                branch: MembershipBranch::RLe1YGe1,
                theorem_case: TheoremCase::A,
            }
        } else {
            MembershipVerdict {
                member: false,
                branch: MembershipBranch::RLe1YLt1NonInteger,
                theorem_case: TheoremCase::A,
            }
        }
    } else {
        MembershipVerdict {
            member: false,
            branch: MembershipBranch::RGt1NonInteger,
            theorem_case: TheoremCase::B,
        }
    }
}

/// The literal two-branch statement, which reads case a) as exactly
/// `(0, ∞) × [1, ∞)`: differs from [`classify`] only on integer `x` with
/// `R ≤ 1` and `y < 1`, where the density is nevertheless a genuine
/// binomial-Gamma mixture.
pub fn literal_member<T: Real>(p: &MixtureParams<T>, pw: &PowerPair<T>) -> bool {
    if p.r_le_one() {
        pw.y() >= T::one()
    } else {
        pw.is_integer_x()
    }
}

/// Verdict of a numerical positivity scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScanVerdict {
    #[serde(rename = "NONNEGATIVE_ON_GRID")]
    NonnegativeOnGrid,
    #[serde(rename = "NEGATIVE_WITNESS")]
    NegativeWitness,
    #[serde(rename = "DIVERGENCE_DETECTED")]
    DivergenceDetected,
}

/// Report of one positivity scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanReport<T> {
    pub verdict: ScanVerdict,
    /// Location of the most negative value found.
    pub witness_t: Option<T>,
    /// Minimum density found on the grid.
    pub min_value: T,
    pub points_evaluated: u64,
}

/// Uniform grid resolution of the scan.
const SCAN_GRID_POINTS: u64 = 10_000;

/// Right-limit refinement offsets at each integer. The ladder reaches down
/// to 1e-12: weak-coefficient divergences (small `R`, large `x`) only
/// overtake the positive head at distances far below the 1e-6 that catches
/// the textbook cases.
const EPS_LADDER: [f64; 7] = [1e-3, 1e-4, 1e-5, 1e-6, 1e-8, 1e-10, 1e-12];

/// Scan the density over `(0, horizon_T]` for negative values.
///
/// The grid is `SCAN_GRID_POINTS` uniform points, every integer lattice
/// point (where `R > 1` partial-sum sign flips surface), and refinement
/// clusters `m + ε` for each integer `m` (where `y < 1` right-limit
/// divergences surface). Returns `DivergenceDetected` when successive
/// ε-refinements at some integer grow negative like `ε^{y-1}` (ratio within
/// a factor 2), `NegativeWitness` for any other value below `-abs_tol`, and
/// `NonnegativeOnGrid` otherwise.
pub fn positivity_scan<T: Real>(
    p: &MixtureParams<T>,
    pw: &PowerPair<T>,
    profile: &EvalProfile<T>,
) -> Result<ScanReport<T>> {
    let horizon = profile.horizon_t;
    let top_integer = horizon.floor().to_u64().unwrap_or(u64::MAX);
    let series_len = top_integer.saturating_add(2);
    let grid_len = SCAN_GRID_POINTS + top_integer * (1 + EPS_LADDER.len() as u64);
    let work = grid_len.saturating_mul(series_len);
    if work > profile.quad_budget.saturating_mul(1000) {
        return Err(Error::BudgetExceeded(format!(
            "scan needs ~{work} term evaluations; raise quad_budget or lower horizon_T"
        )));
    }
    let ev = DensityEvaluator::for_profile(p, pw, profile)?;

    // Uniform grid plus integer lattice, in parallel.
    let lattice: Vec<T> = (1..=top_integer).map(|m| T::from_u64(m).unwrap()).collect();
    let uniform: Vec<T> = (1..=SCAN_GRID_POINTS)
        .map(|i| horizon * T::from_u64(i).unwrap() / T::from_u64(SCAN_GRID_POINTS).unwrap())
        .collect();
    let (min_value, witness_t) = uniform
        .par_iter()
        .chain(lattice.par_iter())
        .map(|&t| (ev.density(t), t))
        .reduce(
            || (T::infinity(), T::zero()),
            |a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a },
        );
    let mut min_value = min_value;
    let mut witness_t = witness_t;
    let mut points = uniform.len() as u64 + lattice.len() as u64;

    // Refinement clusters and the divergence ratio test.
    let mut divergence = false;
    let ratio_window = real::<T>(2.0);
    for m in 0..=top_integer {
        let base = T::from_u64(m).unwrap();
        let mut cluster: Vec<(T, T)> = Vec::with_capacity(EPS_LADDER.len());
        for &eps in &EPS_LADDER {
            let t = base + real::<T>(eps);
            if t > horizon || t <= base {
                continue;
            }
            let v = ev.density(t);
            points += 1;
            if (v, t) < (min_value, witness_t) {
                min_value = v;
                witness_t = t;
            }
            cluster.push((t - base, v)); // exact offset actually evaluated
        }
        if pw.y() < T::one() && !divergence {
            for pair in cluster.windows(2) {
                let (e1, v1) = pair[0];
                let (e2, v2) = pair[1];
                if v1 < -profile.abs_tol && v2 < -profile.abs_tol {
                    let predicted = (e1 / e2).powf(pw.y() - T::one());
                    let observed = v1 / v2;
                    if observed > predicted / ratio_window
                        && observed < predicted * ratio_window
                    {
                        divergence = true;
                        break;
                    }
                }
            }
        }
    }

    let verdict = if divergence {
        ScanVerdict::DivergenceDetected
    } else if min_value < -profile.abs_tol {
        ScanVerdict::NegativeWitness
    } else {
        ScanVerdict::NonnegativeOnGrid
    };
    Ok(ScanReport {
        verdict,
        witness_t: Some(witness_t),
        min_value,
        points_evaluated: points,
    })
}

/// One grid cell of an agreement check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AgreementEntry<T> {
    pub x: T,
    pub y: T,
    pub member: bool,
    pub branch: MembershipBranch,
    pub scan_verdict: ScanVerdict,
    pub min_value: T,
    pub witness_t: Option<T>,
    /// Whether the automatic 4× horizon retry was spent on this cell.
    pub retried: bool,
    pub agrees: bool,
}

/// End-to-end validation: classifier verdicts versus positivity scans.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport<T> {
    pub entries: Vec<AgreementEntry<T>>,
    pub disagreements: u64,
}

/// Scan every pair and compare with [`classify`]: members must scan
/// nonnegative, non-members must yield a negative witness or a detected
/// divergence.
///
/// Each pair is scanned at `max(profile.horizon_t, recommended_horizon)`;
/// `R > 1, y ≥ 1` non-members that still scan nonnegative get one automatic
/// retry at 4× that horizon before being flagged (their negativity onset is
/// not predicted by the theory, so the horizon policy is a heuristic).
pub fn scan_agrees_with_theorem<T: Real>(
    p: &MixtureParams<T>,
    grid: &[PowerPair<T>],
    profile: &EvalProfile<T>,
) -> Result<AgreementReport<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("agreement grid is empty".into()));
    }
    let mut entries = Vec::with_capacity(grid.len());
    for pw in grid {
        let verdict = classify(p, pw);
        let horizon = profile
            .horizon_t
            .max(crate::distribution::recommended_horizon(p, pw));
        let base_profile = profile.with_horizon(horizon);
        let mut report = positivity_scan(p, pw, &base_profile)?;
        let mut retried = false;
        let retry_eligible = !verdict.member
            && !p.r_le_one()
            && pw.y() >= T::one()
            && report.verdict == ScanVerdict::NonnegativeOnGrid;
        if retry_eligible {
            retried = true;
            let retry_profile = profile.with_horizon(horizon * real::<T>(4.0));
            report = positivity_scan(p, pw, &retry_profile)?;
        }
        let agrees = if verdict.member {
            report.verdict == ScanVerdict::NonnegativeOnGrid
        } else {
            matches!(
                report.verdict,
                ScanVerdict::NegativeWitness | ScanVerdict::DivergenceDetected
            )
        };
        entries.push(AgreementEntry {
            x: pw.x(),
            y: pw.y(),
            member: verdict.member,
            branch: verdict.branch,
            scan_verdict: report.verdict,
            min_value: report.min_value,
            witness_t: report.witness_t,
            retried,
            agrees,
        });
    }
    let disagreements = entries.iter().filter(|e| !e.agrees).count() as u64;
    Ok(AgreementReport {
        entries,
        disagreements,
    })
}

/// The zero `z₀ = iπ + log((1-r)/r)` of `z ↦ 1 + r/(1-r) e^z`, and whether it
/// lies inside the analyticity strip `Re z < λ` (equivalent to `R > 1`, the
/// obstruction that excludes non-integer `x` in that regime).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StripZero<T> {
    /// `log((1-r)/r)`.
    pub real_part: T,
    /// `π`.
    pub imag_part: T,
    /// `real_part < λ`, decided through the cached `R` so the strip test and
    /// the classifier can never disagree.
    pub in_strip: bool,
    /// `|1 + r/(1-r) · e^{z₀}|` evaluated in complex arithmetic; zero up to
    /// roundoff.
    pub residual: T,
}

/// Locate the strip zero and numerically confirm it annihilates the
/// Bernoulli factor.
pub fn strip_zero<T: Real>(p: &MixtureParams<T>) -> StripZero<T> {
    let q = p.r() / (T::one() - p.r());
    let real_part = q.recip().ln();
    let imag_part = T::PI();
    let z0 = Complex::new(real_part, imag_part);
    let residual = (Complex::new(T::one(), T::zero()) + z0.exp().scale(q)).norm();
    StripZero {
        real_part,
        imag_part,
        in_strip: p.big_r() > T::one(),
        residual,
    }
}
