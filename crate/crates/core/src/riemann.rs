//! Riemann problem for the two-flux equation: case selection from the data
//! relative to the flux extrema, rarefactions on either side of the
//! interface and the stationary shadow wave between them.

use serde::Serialize;

use crate::analysis::{is_overcompressive, rh_deficit, FluxKind, FluxProfile, GeometryCase};
use crate::fluxlang::FluxExpr;
use crate::problem::ProblemSetup;
use crate::shadow::{classify_shadow, ShadowWaveNet};
use crate::{Error, Result};

/// Samples used to check that `f'` is monotone on a rarefaction.
pub const MONOTONE_SAMPLES: usize = 256;

/// Edge speeds within this distance of zero are snapped to zero.
const EDGE_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RiemannCase {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
    #[serde(rename = "iii")]
    III,
    #[serde(rename = "iv")]
    IV,
}

impl RiemannCase {
    pub fn has_backward(self) -> bool {
        matches!(self, RiemannCase::III | RiemannCase::IV)
    }

    pub fn has_forward(self) -> bool {
        matches!(self, RiemannCase::II | RiemannCase::IV)
    }
}

fn tie_tol(theta: f64) -> f64 {
    1e-12 * theta.abs().max(1.0)
}

/// Case from the position of the data against the extrema; ties within
/// `1e-12·max(1,|θ|)` count as `≥`.
pub fn select_case(u_l: f64, u_r: f64, theta_l: f64, theta_r: f64) -> RiemannCase {
    let left = u_l >= theta_l - tie_tol(theta_l);
    let right = u_r >= theta_r - tie_tol(theta_r);
    match (left, right) {
        (true, true) => RiemannCase::I,
        (true, false) => RiemannCase::II,
        (false, true) => RiemannCase::III,
        (false, false) => RiemannCase::IV,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Backward,
    Forward,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rarefaction {
    pub side: Side,
    pub flux: FluxExpr,
    /// State at the `speed_lo` edge.
    pub u_slow: f64,
    /// State at the `speed_hi` edge.
    pub u_fast: f64,
    pub speed_lo: f64,
    pub speed_hi: f64,
}

impl Rarefaction {
    /// Centred rarefaction of `flux` joining `a` and `b`; `None` when the
    /// two states coincide to 1e-12.
    pub fn new(side: Side, flux: &FluxExpr, a: f64, b: f64) -> Result<Option<Self>> {
        if (a - b).abs() <= 1e-12 {
            return Ok(None);
        }
        let (lo_u, hi_u) = (a.min(b), a.max(b));
        let n = MONOTONE_SAMPLES;
        let mut speeds = Vec::with_capacity(n);
        for i in 0..n {
            let u = if i == n - 1 {
                hi_u
            } else {
                lo_u + (hi_u - lo_u) * i as f64 / (n - 1) as f64
            };
            speeds.push(flux.derivative(u)?);
        }
        let increasing = speeds.windows(2).all(|w| w[1] > w[0]);
        let decreasing = speeds.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::Rarefaction(format!(
                "f' of `{flux}` is not strictly monotone on [{lo_u}, {hi_u}]"
            )));
        }
        let (da, db) = (flux.derivative(a)?, flux.derivative(b)?);
        let (u_slow, u_fast, mut lo, mut hi) = if da <= db { (a, b, da, db) } else { (b, a, db, da) };
        match side {
            Side::Backward => {
                if hi > EDGE_SNAP {
                    return Err(Error::Rarefaction(format!(
                        "backward rarefaction of `{flux}` reaches positive speed {hi}"
                    )));
                }
                hi = hi.min(0.0);
            }
            Side::Forward => {
                if lo < -EDGE_SNAP {
                    return Err(Error::Rarefaction(format!(
                        "forward rarefaction of `{flux}` reaches negative speed {lo}"
                    )));
                }
                lo = lo.max(0.0);
            }
        }
        Ok(Some(Rarefaction {
            side,
            flux: flux.clone(),
            u_slow,
            u_fast,
            speed_lo: lo,
            speed_hi: hi,
        }))
    }

    /// State `u` with `f'(u) = xi` inside the fan.
    pub fn value(&self, xi: f64) -> Result<f64> {
        if !(xi >= self.speed_lo && xi <= self.speed_hi) {
            return Err(Error::OutsideFan {
                xi,
                lo: self.speed_lo,
                hi: self.speed_hi,
            });
        }
        if xi == self.speed_lo {
            return Ok(self.u_slow);
        }
        if xi == self.speed_hi {
            return Ok(self.u_fast);
        }
        // f'(u_slow) - xi < 0 < f'(u_fast) - xi
        let (mut a, mut b) = (self.u_slow, self.u_fast);
        for _ in 0..200 {
            if (b - a).abs() <= 1e-12 {
                break;
            }
            let m = 0.5 * (a + b);
            let s = self.flux.derivative(m)? - xi;
            if s < 0.0 {
                a = m;
            } else if s > 0.0 {
                b = m;
            } else {
                return Ok(m);
            }
        }
        let u = 0.5 * (a + b);
        let (lo_u, hi_u) = (self.u_slow.min(self.u_fast), self.u_slow.max(self.u_fast));
        if !(lo_u..=hi_u).contains(&u) {
            return Err(Error::Rarefaction(format!(
                "bisection for xi = {xi} left the state interval"
            )));
        }
        Ok(u)
    }
}

/// Composed solution: optional backward rarefaction, stationary shadow
/// wave, optional forward rarefaction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveFan {
    pub back: Option<Rarefaction>,
    pub sdw: ShadowWaveNet,
    pub fwd: Option<Rarefaction>,
    pub case: RiemannCase,
    pub u_l: f64,
    pub u_r: f64,
}

/// Build the fan for `setup`. Requires geometry case A with `f_l > f_r`,
/// or a non-decreasing left flux facing a non-increasing right flux
/// (e.g. affine fluxes), where every state pair is overcompressive.
pub fn solve_riemann(setup: &ProblemSetup, pl: &FluxProfile, pr: &FluxProfile) -> Result<WaveFan> {
    let (f_l, f_r) = (&setup.f_l, &setup.f_r);
    let (u_l, u_r) = (setup.u_l, setup.u_r);

    let monotone_pair = matches!(
        (pl.monotone, pr.monotone),
        (Some(l), Some(r)) if l.non_decreasing() && r.non_increasing()
    );
    let (case, u0, u1) = if monotone_pair {
        (RiemannCase::I, u_l, u_r)
    } else {
        let geom = setup.geometry(pl, pr)?;
        if geom.case != GeometryCase::A {
            return Err(Error::UnsupportedGeometry(format!(
                "geometry case {:?}; only case A (convex-type left, concave-type right) is composed",
                geom.case
            )));
        }
        if !geom.assumption1_holds {
            return Err(Error::UnsupportedGeometry(
                "f_l > f_r does not hold on the whole domain".into(),
            ));
        }
        let (tl, tr) = match (pl.kind, pl.theta, pr.kind, pr.theta) {
            (FluxKind::ConvexType, Some(a), FluxKind::ConcaveType, Some(b)) => (a, b),
            _ => unreachable!("case A fixes both kinds"),
        };
        let case = select_case(u_l, u_r, tl, tr);
        let u0 = if case.has_backward() { tl } else { u_l };
        let u1 = if case.has_forward() { tr } else { u_r };
        (case, u0, u1)
    };

    if !is_overcompressive(f_l, f_r, u0, u1)? {
        return Err(Error::UnsupportedGeometry(format!(
            "shadow-wave states ({u0}, {u1}) are not overcompressive"
        )));
    }
    if pl.chi != 1 {
        return Err(Error::NoTableRow(
            "the left flux must be positive at +infinity (chi_l = 1)".into(),
        ));
    }
    let kappa = rh_deficit(f_l, f_r, u0, u1)?;
    let profile = classify_shadow(pl.nu, pr.nu, pr.chi, kappa, pl.c, pr.c)?;
    let back = if case.has_backward() {
        Rarefaction::new(Side::Backward, f_l, u_l, u0)?
    } else {
        None
    };
    let fwd = if case.has_forward() {
        Rarefaction::new(Side::Forward, f_r, u1, u_r)?
    } else {
        None
    };
    Ok(WaveFan {
        back,
        sdw: ShadowWaveNet::new(u0, u1, profile),
        fwd,
        case,
        u_l,
        u_r,
    })
}

impl WaveFan {
    /// Largest admissible `eps`: the ε-fan may cover at most half of an
    /// adjacent rarefaction. Infinite when there is none.
    pub fn eps_limit(&self) -> f64 {
        let mut lim = f64::INFINITY;
        if let Some(b) = &self.back {
            lim = lim.min(0.5 * b.speed_lo.abs());
        }
        if let Some(f) = &self.fwd {
            lim = lim.min(0.5 * f.speed_hi.abs());
        }
        lim
    }

    /// Bounded part of the solution: rarefactions and constant states,
    /// with the shadow wave collapsed onto `x = 0`. At `t = 0` this is the
    /// Riemann data.
    pub fn bounded_part(&self, x: f64, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(if x < 0.0 { self.u_l } else { self.u_r });
        }
        let xi = x / t;
        if xi <= 0.0 {
            match &self.back {
                Some(b) if xi < b.speed_lo => Ok(self.u_l),
                Some(b) if xi <= b.speed_hi => b.value(xi),
                _ => Ok(self.sdw.u0),
            }
        } else {
            match &self.fwd {
                Some(f) if xi > f.speed_hi => Ok(self.u_r),
                Some(f) if xi >= f.speed_lo => f.value(xi),
                _ => Ok(self.sdw.u1),
            }
        }
    }

    /// Solution at finite `eps`: the shadow net inside `|x| ≤ εt`, the
    /// bounded part elsewhere.
    pub fn sample(&self, x: f64, t: f64, eps: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::invalid(format!("t must be positive, got {t}")));
        }
        let limit = self.eps_limit();
        if !(eps > 0.0) || eps >= limit {
            return Err(Error::EpsTooLarge { eps, limit });
        }
        if x.abs() <= eps * t {
            Ok(self.sdw.sample(eps, x, t))
        } else {
            self.bounded_part(x, t)
        }
    }
}

/// Free-function form of [`WaveFan::sample`].
pub fn sample_solution(fan: &WaveFan, x: f64, t: f64, eps: f64) -> Result<f64> {
    fan.sample(x, t, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Interval;

    fn setup(l: &str, r: &str, u_l: f64, u_r: f64) -> ProblemSetup {
        ProblemSetup::new(l, r, u_l, u_r, Interval::new(-5.0, 5.0)).unwrap()
    }

    #[test]
    fn case_partition() {
        assert_eq!(select_case(1.0, 1.0, 0.0, 0.0), RiemannCase::I);
        assert_eq!(select_case(1.0, -1.0, 0.0, 0.0), RiemannCase::II);
        assert_eq!(select_case(-1.0, 1.0, 0.0, 0.0), RiemannCase::III);
        assert_eq!(select_case(-1.0, -1.0, 0.0, 0.0), RiemannCase::IV);
        assert_eq!(select_case(0.0, 0.0, 0.0, 0.0), RiemannCase::I);
    }

    #[test]
    fn case_ii_sqrt_example() {
        let fan = setup("sqrt(u^2+1)", "-sqrt(u^2+1)", 1.0, -1.0).solve().unwrap();
        assert_eq!(fan.case, RiemannCase::II);
        assert!(fan.back.is_none());
        assert_eq!(fan.sdw.u0, 1.0);
        assert!(fan.sdw.u1.abs() <= 1e-9);
        assert!((fan.sdw.profile.kappa - (2f64.sqrt() + 1.0)).abs() <= 1e-12);
        let r = fan.fwd.as_ref().unwrap();
        assert_eq!(r.speed_lo, 0.0);
        assert!((r.speed_hi - 0.5f64.sqrt()).abs() <= 1e-12);
        let u = r.value(0.5).unwrap();
        assert!((u + 0.5 / 0.75f64.sqrt()).abs() <= 1e-11);

        let v = fan.sample(0.5, 1.0, 1e-6).unwrap();
        assert!((v - u).abs() <= 1e-11);
        assert_eq!(fan.sample(-1.0, 1.0, 1e-6).unwrap(), 1.0);
    }

    #[test]
    fn example1_is_case_i() {
        let fan = setup("(1+2*u^2)/(1+u^2)", "-(1+2*u^2)/(1+u^2)", 1.0, 1.0)
            .solve()
            .unwrap();
        assert_eq!(fan.case, RiemannCase::I);
        assert_eq!(fan.sdw.profile.kappa, 3.0);
        let eps = 1e-3;
        let v = fan.sample(0.5 * eps, 1.0, eps).unwrap();
        assert!((v - (1.0 + 1.5 / eps)).abs() <= 1e-9);
        assert_eq!(fan.eps_limit(), f64::INFINITY);
    }

    #[test]
    fn data_at_extrema_is_case_i() {
        let fan = setup("sqrt(u^2+1)", "-sqrt(u^2+1)", 0.0, 0.0).solve().unwrap();
        assert_eq!(fan.case, RiemannCase::I);
        assert!((fan.sdw.profile.kappa - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn burgers_identity_fan() {
        let f = FluxExpr::parse("u^2/2").unwrap();
        let r = Rarefaction::new(Side::Forward, &f, 0.0, 1.0).unwrap().unwrap();
        assert_eq!((r.speed_lo, r.speed_hi), (0.0, 1.0));
        assert!((r.value(0.3).unwrap() - 0.3).abs() <= 1e-12);
        assert_eq!(r.value(0.0).unwrap(), 0.0);
        assert!(matches!(r.value(1.5), Err(Error::OutsideFan { .. })));
    }

    #[test]
    fn rarefaction_rejections() {
        let f = FluxExpr::parse("u^3-3*u").unwrap();
        assert!(matches!(
            Rarefaction::new(Side::Forward, &f, -2.0, 2.0),
            Err(Error::Rarefaction(_))
        ));
        let g = FluxExpr::parse("u^2/2").unwrap();
        assert!(matches!(
            Rarefaction::new(Side::Backward, &g, 0.0, 1.0),
            Err(Error::Rarefaction(_))
        ));
        assert_eq!(Rarefaction::new(Side::Forward, &g, 1.0, 1.0).unwrap(), None);
    }

    #[test]
    fn case_iv_has_both_fans() {
        let fan = setup("sqrt(u^2+1)", "-sqrt(u^2+1)", -1.0, -1.0).solve().unwrap();
        assert_eq!(fan.case, RiemannCase::IV);
        let (b, f) = (fan.back.as_ref().unwrap(), fan.fwd.as_ref().unwrap());
        assert!(b.speed_hi <= 0.0 && f.speed_lo >= 0.0);
        let half = 0.5 / 2f64.sqrt();
        assert!((fan.eps_limit() - half).abs() <= 1e-15);
        assert!(matches!(fan.sample(0.0, 1.0, 0.4), Err(Error::EpsTooLarge { .. })));
        // u/sqrt(1+u^2) = -1/2 at u = -1/sqrt(3)
        let u = -(1.0f64 / 3.0).sqrt();
        assert!((fan.sample(-0.5, 1.0, 1e-6).unwrap() - u).abs() <= 1e-11);
        assert!((fan.sample(0.5, 1.0, 1e-6).unwrap() - u).abs() <= 1e-11);
        assert_eq!(fan.sample(-3.0, 1.0, 1e-6).unwrap(), -1.0);
        assert_eq!(fan.sample(3.0, 1.0, 1e-6).unwrap(), -1.0);
    }

    #[test]
    fn unsupported_geometry_rejected() {
        let err = setup("u^2+1", "-1/(u^2+1)", 1.0, 1.0).solve().unwrap_err();
        assert!(matches!(err, Error::UnsupportedGeometry(_)));
    }

    #[test]
    fn affine_pair_is_solved() {
        let fan = setup("u", "-u", 1.0, 1.0).solve().unwrap();
        assert_eq!(fan.case, RiemannCase::I);
        assert_eq!(fan.sdw.profile.kappa, 2.0);
        assert_eq!((fan.sdw.profile.xi0, fan.sdw.profile.xi1), (1.0, 1.0));
    }
}
