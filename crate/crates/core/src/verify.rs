//! Numerical cross-checks: the delta-mass test comparing the singular mass
//! of a Godunov run with `κt`, and a randomized residual battery over the
//! shadow-wave table.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::godunov::GridState;
use crate::riemann::WaveFan;
use crate::shadow::{classify_shadow, collect_terms, residual_majorant, residual_terms, Growth, TableRow};
use crate::{Error, Result};

/// Relative error allowed on the singular mass at the final time.
pub const MASS_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaMassReport {
    pub times: Vec<f64>,
    pub p_l: Vec<f64>,
    pub expected: Vec<f64>,
    pub rel_err: Vec<f64>,
    pub max_rel_err: f64,
    pub kappa: f64,
}

impl DeltaMassReport {
    /// CSV with header `t,P_l,expected,rel_err`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,P_l,expected,rel_err\n");
        for i in 0..self.times.len() {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], self.p_l[i], self.expected[i], self.rel_err[i]
            );
        }
        s
    }

    pub fn passes(&self) -> bool {
        self.max_rel_err <= MASS_TOLERANCE
    }

    /// Least-squares slope of `P_l(t)` through the origin over
    /// `t ∈ [t_lo, t_hi]`; `None` without positive samples there.
    pub fn fit_slope(&self, t_lo: f64, t_hi: f64) -> Option<f64> {
        let (mut tp, mut tt) = (0.0, 0.0);
        for (&t, &p) in self.times.iter().zip(&self.p_l) {
            if t >= t_lo && t <= t_hi && t > 0.0 {
                tp += t * p;
                tt += t * t;
            }
        }
        (tt > 0.0).then(|| tp / tt)
    }
}

/// Singular mass `P_l(t) = Σ (u_j − b_j)·dx` of each snapshot, where `b` is
/// the bounded part of `fan`, against `κt`.
pub fn delta_mass(snapshots: &[GridState], fan: &WaveFan, eps_background: f64) -> Result<DeltaMassReport> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::invalid("no snapshots to measure"))?;
    let kappa = fan.sdw.profile.kappa;
    let mut r = DeltaMassReport {
        times: Vec::new(),
        p_l: Vec::new(),
        expected: Vec::new(),
        rel_err: Vec::new(),
        max_rel_err: 0.0,
        kappa,
    };
    for s in snapshots {
        if s.len() != first.len() || s.dx != first.dx || s.x0 != first.x0 {
            return Err(Error::GridMismatch(format!(
                "snapshot at t = {} has {} cells of width {} from {}, expected {} of width {} from {}",
                s.t,
                s.len(),
                s.dx,
                s.x0,
                first.len(),
                first.dx,
                first.x0
            )));
        }
        let mut p = 0.0;
        for j in 0..s.len() {
            let x = s.x(j);
            let b = if s.t > 0.0 && x.abs() > eps_background * s.t {
                fan.sample(x, s.t, eps_background)?
            } else {
                fan.bounded_part(x, s.t)?
            };
            p += (s.u[j] - b) * s.dx;
        }
        let expected = kappa * s.t;
        let err = if s.t == 0.0 {
            p.abs()
        } else {
            (p - expected).abs() / expected.max(1e-300)
        };
        r.times.push(s.t);
        r.p_l.push(p);
        r.expected.push(expected);
        r.rel_err.push(err);
        r.max_rel_err = r.max_rel_err.max(err);
    }
    Ok(r)
}

/// Default ε sequence for the residual battery.
pub const BATTERY_EPS: [f64; 8] = [1e-2, 1e-4, 1e-8, 1e-16, 1e-32, 1e-64, 1e-128, 1e-256];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatteryCase {
    pub nu1: f64,
    pub nu2: f64,
    pub chi: i8,
    pub kappa: f64,
    pub c1: f64,
    pub c2: f64,
}

impl BatteryCase {
    pub fn growth(&self) -> Growth {
        Growth {
            nu1: self.nu1,
            c1: self.c1,
            nu2: self.nu2,
            c2: self.c2,
            chi: self.chi,
        }
    }
}

/// Random parameters that fall in `row`.
pub fn sample_admissible<R: Rng>(row: TableRow, rng: &mut R) -> BatteryCase {
    use TableRow::*;
    let sub = |r: &mut R| r.gen_range(0.0..=0.95);
    let sup = |r: &mut R| r.gen_range(1.0..=3.0);
    let strict = |r: &mut R| r.gen_range(1.05..=3.0);
    let (nu1, nu2) = match row {
        PlusBothSub | MinusBothSub => (sub(rng), sub(rng)),
        PlusLeftSub | MinusLeftSub => (sub(rng), sup(rng)),
        PlusRightSub | MinusRightSub => (sup(rng), sub(rng)),
        MinusLeftLinear => (1.0, strict(rng)),
        MinusRightLinear => (strict(rng), 1.0),
        MinusEqual => {
            let nu = rng.gen_range(1.0..=1.95);
            (nu, nu)
        }
        MinusLeftSlower | MinusRightSlower => {
            let a = rng.gen_range(1.05..=1.90);
            let b = rng.gen_range(a + 0.05..=1.95);
            if row == MinusLeftSlower {
                (a, b)
            } else {
                (b, a)
            }
        }
    };
    BatteryCase {
        nu1,
        nu2,
        chi: row.chi(),
        kappa: rng.gen_range(0.5..=5.0),
        c1: rng.gen_range(0.5..=5.0),
        c2: rng.gen_range(0.5..=5.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BatteryOutcome {
    /// Residual majorants along the ε list; `None` for a residual that
    /// vanishes identically.
    Checked {
        row: TableRow,
        residuals: [Option<Vec<f64>>; 3],
        pass: bool,
    },
    NoRow(String),
}

impl BatteryOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, BatteryOutcome::Checked { pass: true, .. })
    }
}

/// Classify `case` and check that each residual majorant is non-increasing
/// along `eps_list` and ends below `1e-3` of its first value.
pub fn residual_battery_case(case: &BatteryCase, eps_list: &[f64]) -> Result<BatteryOutcome> {
    if eps_list.len() < 3 || !eps_list.windows(2).all(|w| w[1] < w[0]) || eps_list[0] >= 1.0 {
        return Err(Error::invalid(
            "eps_list needs at least 3 strictly decreasing values in (0, 1)",
        ));
    }
    let p = match classify_shadow(case.nu1, case.nu2, case.chi, case.kappa, case.c1, case.c2) {
        Ok(p) => p,
        Err(Error::NoTableRow(msg)) => return Ok(BatteryOutcome::NoRow(msg)),
        Err(e) => return Err(e),
    };
    let mut pass = true;
    let residuals = residual_terms(&p, case.growth()).map(|terms| {
        let collected = collect_terms(&terms);
        if collected.is_empty() {
            return None;
        }
        let seq: Vec<f64> = eps_list.iter().map(|&e| residual_majorant(&collected, e)).collect();
        let monotone = seq.windows(2).all(|w| w[1] <= w[0]);
        let decayed = seq[seq.len() - 1] < 1e-3 * seq[0];
        pass &= monotone && decayed;
        Some(seq)
    });
    Ok(BatteryOutcome::Checked {
        row: p.table_row,
        residuals,
        pass,
    })
}

/// Per-row summary of [`residual_battery`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowReport {
    pub row: TableRow,
    pub cases: usize,
    pub passed: usize,
    pub kind_matches: bool,
}

impl RowReport {
    pub fn pass(&self) -> bool {
        self.passed == self.cases && self.kind_matches
    }
}

/// Run `per_row` random admissible cases for each of `rows`, seeded so the
/// battery is reproducible. A case passes when it lands in its own row,
/// the residual gates hold and the kind agrees with the table.
pub fn residual_battery(rows: &[TableRow], eps_list: &[f64], per_row: usize, seed: u64) -> Result<Vec<RowReport>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(rows.len());
    for &row in rows {
        let mut rep = RowReport {
            row,
            cases: per_row,
            passed: 0,
            kind_matches: true,
        };
        for _ in 0..per_row {
            let case = sample_admissible(row, &mut rng);
            let outcome = residual_battery_case(&case, eps_list)?;
            if let BatteryOutcome::Checked { row: got, pass, .. } = outcome {
                let p = classify_shadow(case.nu1, case.nu2, case.chi, case.kappa, case.c1, case.c2)?;
                rep.kind_matches &= p.kind == row.tabulated_kind();
                if pass && got == row {
                    rep.passed += 1;
                }
            }
        }
        out.push(rep);
    }
    Ok(out)
}
