//! Problem setup: the two fluxes, Riemann data and the state domain, plus
//! the end-to-end classification report.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    self, Asymptotics, FluxProfile, Geometry, Interval, DEFAULT_GRID_N,
};
use crate::fluxlang::FluxExpr;
use crate::riemann::{self, RiemannCase, WaveFan};
use crate::shadow::{growth_hypothesis_holds, ShadowProfile};
use crate::{Error, Result};

/// Asymptotic data supplied by the user instead of being estimated.
/// `chi` is the sign of the right flux at `+∞`; the left flux is taken
/// positive there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsOverride {
    pub nu1: f64,
    pub c1: f64,
    pub nu2: f64,
    pub c2: f64,
    pub chi: i8,
}

impl AsymptoticsOverride {
    fn validate(&self) -> Result<()> {
        let ok = |nu: f64, c: f64| nu.is_finite() && nu >= 0.0 && c.is_finite() && c > 0.0;
        if !ok(self.nu1, self.c1) || !ok(self.nu2, self.c2) {
            return Err(Error::invalid(
                "asymptotics override needs nu >= 0 and c in (0, inf)",
            ));
        }
        if self.chi != 1 && self.chi != -1 {
            return Err(Error::invalid(format!("chi must be +1 or -1, got {}", self.chi)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSetup {
    pub f_l: FluxExpr,
    pub f_r: FluxExpr,
    pub u_l: f64,
    pub u_r: f64,
    pub domain: Interval,
    pub asymptotics_override: Option<AsymptoticsOverride>,
    pub grid_n: usize,
}

impl ProblemSetup {
    pub fn new(f_l: &str, f_r: &str, u_l: f64, u_r: f64, domain: Interval) -> Result<Self> {
        Self::from_exprs(FluxExpr::parse(f_l)?, FluxExpr::parse(f_r)?, u_l, u_r, domain)
    }

    pub fn from_exprs(f_l: FluxExpr, f_r: FluxExpr, u_l: f64, u_r: f64, domain: Interval) -> Result<Self> {
        if !(domain.lo.is_finite() && domain.hi.is_finite() && domain.lo < domain.hi) {
            return Err(Error::invalid(format!(
                "domain [{}, {}] is not a proper interval",
                domain.lo, domain.hi
            )));
        }
        if !domain.contains(u_l) || !domain.contains(u_r) {
            return Err(Error::invalid(format!(
                "Riemann data ({u_l}, {u_r}) must lie in [{}, {}]",
                domain.lo, domain.hi
            )));
        }
        Ok(ProblemSetup {
            f_l,
            f_r,
            u_l,
            u_r,
            domain,
            asymptotics_override: None,
            grid_n: DEFAULT_GRID_N,
        })
    }

    pub fn with_asymptotics(mut self, o: AsymptoticsOverride) -> Result<Self> {
        o.validate()?;
        self.asymptotics_override = Some(o);
        Ok(self)
    }

    pub fn profiles(&self) -> Result<(FluxProfile, FluxProfile)> {
        let (al, ar) = match self.asymptotics_override {
            Some(o) => (
                Some(Asymptotics { nu: o.nu1, c: o.c1, chi: 1 }),
                Some(Asymptotics { nu: o.nu2, c: o.c2, chi: o.chi }),
            ),
            None => (None, None),
        };
        Ok((
            FluxProfile::analyze(&self.f_l, self.domain, self.grid_n, al)?,
            FluxProfile::analyze(&self.f_r, self.domain, self.grid_n, ar)?,
        ))
    }

    pub fn geometry(&self, pl: &FluxProfile, pr: &FluxProfile) -> Result<Geometry> {
        analysis::geometry_case(pl, pr, &self.f_l, &self.f_r, self.domain, self.grid_n)
    }

    pub fn solve(&self) -> Result<WaveFan> {
        let (pl, pr) = self.profiles()?;
        riemann::solve_riemann(self, &pl, &pr)
    }

    /// Run every diagnostic and collect the results. Failures of the
    /// composition step are recorded in `unsupported`, not returned.
    pub fn classify(&self) -> Result<Classification> {
        let (left, right) = self.profiles()?;
        let geometry = self.geometry(&left, &right).ok();
        let mut warnings = Vec::new();
        if !growth_hypothesis_holds(left.nu, right.nu, right.chi) {
            warnings.push(format!(
                "growth exponents nu1 = {}, nu2 = {} with chi = {} lie outside the stated growth hypothesis",
                left.nu, right.nu, right.chi
            ));
        }
        let mut c = Classification {
            left,
            right,
            geometry,
            riemann_case: None,
            sdw_states: None,
            overcompressive: None,
            kappa: None,
            shadow: None,
            table_row: None,
            warnings,
            unsupported: None,
        };
        match riemann::solve_riemann(self, &c.left, &c.right) {
            Ok(fan) => {
                let (u0, u1) = (fan.sdw.u0, fan.sdw.u1);
                c.riemann_case = Some(fan.case);
                c.sdw_states = Some([u0, u1]);
                c.overcompressive = Some(analysis::is_overcompressive(&self.f_l, &self.f_r, u0, u1)?);
                c.kappa = Some(fan.sdw.profile.kappa);
                c.table_row = Some(fan.sdw.profile.table_row.label().to_string());
                c.shadow = Some(fan.sdw.profile);
            }
            Err(e) => c.unsupported = Some(e),
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub left: FluxProfile,
    pub right: FluxProfile,
    pub geometry: Option<Geometry>,
    pub riemann_case: Option<RiemannCase>,
    pub sdw_states: Option<[f64; 2]>,
    pub overcompressive: Option<bool>,
    pub kappa: Option<f64>,
    pub shadow: Option<ShadowProfile>,
    pub table_row: Option<String>,
    pub warnings: Vec<String>,
    #[serde(serialize_with = "display_error")]
    pub unsupported: Option<Error>,
}

fn display_error<S: serde::Serializer>(e: &Option<Error>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.collect_str(e),
        None => s.serialize_none(),
    }
}
