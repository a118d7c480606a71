//! Flux classification: convex/concave type, extremum location, growth at
//! infinity, geometry case, overcompressibility and the Rankine–Hugoniot
//! deficit at the interface.

use serde::Serialize;

use crate::fluxlang::FluxExpr;
use crate::{Error, Result};

/// Default number of grid samples used to scan a flux.
pub const DEFAULT_GRID_N: usize = 4096;

/// Probes used for the growth estimate `f(u) ~ c·u^nu`.
pub const ASYMPTOTIC_PROBES: (f64, f64) = (1e6, 1e8);

/// Tolerance on derivative signs; the extremum itself has `f' = 0`.
pub const DERIVATIVE_SIGN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.lo && u <= self.hi
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::invalid(format!(
                "domain [{}, {}] is not a proper finite interval",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    /// `n` equispaced points including both ends.
    pub fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let h = self.width() / (n - 1) as f64;
        (0..n).map(move |i| {
            if i == n - 1 {
                self.hi
            } else {
                self.lo + i as f64 * h
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FluxKind {
    ConvexType,
    ConcaveType,
    Other,
}

/// Monotone behaviour of an `Other` flux on the sampled domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
}

impl Monotonicity {
    pub fn non_decreasing(self) -> bool {
        matches!(self, Monotonicity::Increasing | Monotonicity::Constant)
    }

    pub fn non_increasing(self) -> bool {
        matches!(self, Monotonicity::Decreasing | Monotonicity::Constant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeClass {
    pub kind: FluxKind,
    /// Location of the unique extremum; `None` unless the flux is of
    /// convex or concave type.
    pub theta: Option<f64>,
    pub monotone: Option<Monotonicity>,
}

/// Growth at `+∞`: `f(u) ~ chi·c·u^nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptotics {
    pub nu: f64,
    pub c: f64,
    pub chi: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxProfile {
    pub kind: FluxKind,
    pub theta: Option<f64>,
    pub monotone: Option<Monotonicity>,
    pub nu: f64,
    pub c: f64,
    pub chi: i8,
    pub domain: Interval,
}

impl FluxProfile {
    /// Classify `f` on `domain` and attach its asymptotics, either estimated
    /// or taken from `given`.
    pub fn analyze(
        f: &FluxExpr,
        domain: Interval,
        grid_n: usize,
        given: Option<Asymptotics>,
    ) -> Result<Self> {
        let class = classify_type(f, domain, grid_n)?;
        let asym = match given {
            Some(a) => a,
            None => estimate_asymptotics(f)?,
        };
        Ok(FluxProfile {
            kind: class.kind,
            theta: class.theta,
            monotone: class.monotone,
            nu: asym.nu,
            c: asym.c,
            chi: asym.chi,
            domain,
        })
    }

    pub fn asymptotics(&self) -> Asymptotics {
        Asymptotics {
            nu: self.nu,
            c: self.c,
            chi: self.chi,
        }
    }
}

fn sign_with_tol(d: f64, tol: f64) -> i8 {
    if d > tol {
        1
    } else if d < -tol {
        -1
    } else {
        0
    }
}

/// Scan `f` on a uniform grid and decide whether it has exactly one
/// interior minimum (convex type) or maximum (concave type).
pub fn classify_type(f: &FluxExpr, domain: Interval, grid_n: usize) -> Result<TypeClass> {
    domain.validate()?;
    if grid_n < 64 {
        return Err(Error::invalid(format!("grid_n = {grid_n} must be at least 64")));
    }
    let xs: Vec<f64> = domain.grid(grid_n).collect();
    let vals = xs.iter().map(|&x| f.eval(x)).collect::<Result<Vec<_>, _>>()?;

    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = 8.0 * f64::EPSILON * scale;

    let mut minima = 0;
    let mut maxima = 0;
    let mut prev = 0i8;
    let mut seen_up = false;
    let mut seen_down = false;
    for w in vals.windows(2) {
        let s = sign_with_tol(w[1] - w[0], tol);
        match s {
            1 => seen_up = true,
            -1 => seen_down = true,
            _ => continue,
        }
        if prev == -1 && s == 1 {
            minima += 1;
        } else if prev == 1 && s == -1 {
            maxima += 1;
        }
        prev = s;
    }

    let kind = match (minima, maxima) {
        (1, 0) => FluxKind::ConvexType,
        (0, 1) => FluxKind::ConcaveType,
        _ => FluxKind::Other,
    };
    let monotone = match (kind, seen_up, seen_down) {
        (FluxKind::Other, false, false) => Some(Monotonicity::Constant),
        (FluxKind::Other, true, false) => Some(Monotonicity::Increasing),
        (FluxKind::Other, false, true) => Some(Monotonicity::Decreasing),
        _ => None,
    };
    let theta = match kind {
        FluxKind::Other => None,
        FluxKind::ConvexType | FluxKind::ConcaveType => {
            let sense = if kind == FluxKind::ConvexType { 1.0 } else { -1.0 };
            let k = (0..vals.len())
                .min_by(|&a, &b| (sense * vals[a]).total_cmp(&(sense * vals[b])))
                .unwrap_or(0);
            let lo = xs[k.saturating_sub(1)];
            let hi = xs[(k + 1).min(xs.len() - 1)];
            Some(refine_extremum(f, lo, hi, sense, domain)?)
        }
    };
    Ok(TypeClass {
        kind,
        theta,
        monotone,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimum of `sense·f` on `[lo, hi]`,
/// followed by bisection on the sign of `f'` where the bracket allows it.
fn refine_extremum(f: &FluxExpr, lo: f64, hi: f64, sense: f64, domain: Interval) -> Result<f64> {
    let g = |x: f64| f.eval(x).map(|v| sense * v);
    let target = 1e-10 * domain.width();
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    while (b - a).abs() > target {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d)?;
        }
    }
    let golden = 0.5 * (a + b);

    // f' changes sign at the extremum; polish inside a small bracket.
    let slope = |x: f64| f.derivative(x).ok().map(|d| sense * d);
    let r = 1e-8 * domain.width();
    let (mut a, mut b) = ((golden - r).max(lo), (golden + r).min(hi));
    match (slope(a), slope(b)) {
        (Some(sa), Some(sb)) if sa < 0.0 && sb > 0.0 => {}
        _ => return Ok(golden),
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        match slope(m) {
            Some(s) if s < 0.0 => a = m,
            Some(s) if s > 0.0 => b = m,
            Some(_) => return Ok(m),
            None => return Ok(golden),
        }
    }
    Ok(0.5 * (a + b))
}

/// Estimate `f(u) ~ chi·c·u^nu` from two far-field probes.
pub fn estimate_asymptotics(f: &FluxExpr) -> Result<Asymptotics> {
    let (u1, u2) = ASYMPTOTIC_PROBES;
    let fail = |reason: String| Error::Asymptotics {
        flux: f.to_string(),
        reason,
    };
    let f1 = f.eval(u1).map_err(|e| fail(e.to_string()))?;
    let f2 = f.eval(u2).map_err(|e| fail(e.to_string()))?;
    if f1 == 0.0 || f2 == 0.0 {
        return Err(fail("flux vanishes at a probe point".into()));
    }
    let chi = if f2 > 0.0 { 1 } else { -1 };
    let raw = (f2.abs().ln() - f1.abs().ln()) / (u2.ln() - u1.ln());
    let nu = (raw.max(0.0) * 1000.0).round() / 1000.0;
    let (nu, c) = if nu < 1e-3 {
        (0.0, f2.abs())
    } else {
        (nu, f2.abs() / u2.powf(nu))
    };
    if !(c.is_finite() && c > 0.0) {
        return Err(fail(format!("asymptotic constant {c} is not in (0, inf)")));
    }
    Ok(Asymptotics { nu, c, chi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GeometryCase {
    /// left convex type, right concave type
    A,
    /// both convex type
    B,
    /// left concave type, right convex type
    C,
    /// both concave type
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    pub case: GeometryCase,
    /// `f_l > f_r` on every grid point of the domain.
    pub assumption1_holds: bool,
}

/// Smallest sampled value of `f_l - f_r` on `domain`.
pub fn min_flux_gap(f_l: &FluxExpr, f_r: &FluxExpr, domain: Interval, grid_n: usize) -> Result<f64> {
    domain.validate()?;
    let mut gap = f64::INFINITY;
    for u in domain.grid(grid_n.max(2)) {
        gap = gap.min(f_l.eval(u)? - f_r.eval(u)?);
    }
    Ok(gap)
}

pub fn geometry_case(
    pl: &FluxProfile,
    pr: &FluxProfile,
    f_l: &FluxExpr,
    f_r: &FluxExpr,
    domain: Interval,
    grid_n: usize,
) -> Result<Geometry> {
    use FluxKind::*;
    let case = match (pl.kind, pr.kind) {
        (ConvexType, ConcaveType) => GeometryCase::A,
        (ConvexType, ConvexType) => GeometryCase::B,
        (ConcaveType, ConvexType) => GeometryCase::C,
        (ConcaveType, ConcaveType) => GeometryCase::D,
        (l, r) => {
            return Err(Error::UnsupportedGeometry(format!(
                "left flux is {l:?}, right flux is {r:?}; both must be of convex or concave type"
            )))
        }
    };
    let assumption1_holds = min_flux_gap(f_l, f_r, domain, grid_n)? > 0.0;
    Ok(Geometry {
        case,
        assumption1_holds,
    })
}

/// `f_l(u0) - f_r(u1)`.
pub fn rh_deficit(f_l: &FluxExpr, f_r: &FluxExpr, u0: f64, u1: f64) -> Result<f64> {
    Ok(f_l.eval(u0)? - f_r.eval(u1)?)
}

/// `f_l'(u0) >= 0 >= f_r'(u1)`, with a small sign tolerance.
pub fn is_overcompressive(f_l: &FluxExpr, f_r: &FluxExpr, u0: f64, u1: f64) -> Result<bool> {
    let dl = f_l.derivative(u0)?;
    let dr = f_r.derivative(u1)?;
    Ok(dl >= -DERIVATIVE_SIGN_TOL && dr <= DERIVATIVE_SIGN_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> FluxExpr {
        FluxExpr::parse(s).unwrap()
    }

    const DOM: Interval = Interval { lo: -5.0, hi: 5.0 };

    #[test]
    fn convex_type_example() {
        let c = classify_type(&p("u^2+1"), DOM, DEFAULT_GRID_N).unwrap();
        assert_eq!(c.kind, FluxKind::ConvexType);
        assert!(c.theta.unwrap().abs() <= 1e-10);
    }

    #[test]
    fn concave_type_example() {
        let c = classify_type(&p("1/(u^2+1)"), DOM, DEFAULT_GRID_N).unwrap();
        assert_eq!(c.kind, FluxKind::ConcaveType);
        assert!(c.theta.unwrap().abs() <= 1e-10);
    }

    #[test]
    fn monotone_affine_is_other() {
        let c = classify_type(&p("u"), DOM, DEFAULT_GRID_N).unwrap();
        assert_eq!(c.kind, FluxKind::Other);
        assert_eq!(c.theta, None);
        assert_eq!(c.monotone, Some(Monotonicity::Increasing));
        let c = classify_type(&p("-u"), DOM, DEFAULT_GRID_N).unwrap();
        assert_eq!(c.monotone, Some(Monotonicity::Decreasing));
    }

    #[test]
    fn two_extrema_is_other_and_not_monotone() {
        let c = classify_type(&p("u^3-3*u"), DOM, DEFAULT_GRID_N).unwrap();
        assert_eq!(c.kind, FluxKind::Other);
        assert_eq!(c.monotone, None);
    }

    #[test]
    fn off_centre_minimum() {
        let c = classify_type(&p("(u-1.234)^2"), DOM, DEFAULT_GRID_N).unwrap();
        assert!((c.theta.unwrap() - 1.234).abs() <= 1e-12);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(matches!(
            classify_type(&p("u^2"), DOM, 10),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn asymptotics_examples() {
        let a = estimate_asymptotics(&p("(1+2*u^2)/(1+u^2)")).unwrap();
        assert_eq!((a.nu, a.chi), (0.0, 1));
        assert!((a.c - 2.0).abs() < 1e-12);

        let a = estimate_asymptotics(&p("-(1+2*u^2)/(1+u^2)")).unwrap();
        assert_eq!((a.nu, a.chi), (0.0, -1));
        assert!((a.c - 2.0).abs() < 1e-12);

        let a = estimate_asymptotics(&p("sqrt(u^2+1)+1")).unwrap();
        assert_eq!((a.nu, a.chi), (1.0, 1));
        assert!((a.c - 1.0).abs() < 1e-7);

        assert_eq!(
            estimate_asymptotics(&p("u")).unwrap(),
            Asymptotics {
                nu: 1.0,
                c: 1.0,
                chi: 1
            }
        );
    }

    #[test]
    fn asymptotics_overflow_requires_override() {
        assert!(matches!(
            estimate_asymptotics(&p("exp(u)")),
            Err(Error::Asymptotics { .. })
        ));
    }

    #[test]
    fn geometry_examples() {
        let dom = DOM;
        let run = |l: &str, r: &str| {
            let (fl, fr) = (p(l), p(r));
            let pl = FluxProfile::analyze(&fl, dom, DEFAULT_GRID_N, None).unwrap();
            let pr = FluxProfile::analyze(&fr, dom, DEFAULT_GRID_N, None).unwrap();
            geometry_case(&pl, &pr, &fl, &fr, dom, DEFAULT_GRID_N)
        };
        let g = run("u^2+1", "1/(2*(u^2+1))").unwrap();
        assert_eq!((g.case, g.assumption1_holds), (GeometryCase::A, true));
        let g = run("1/(u^2+1)", "-1/(u^2+1)").unwrap();
        assert_eq!((g.case, g.assumption1_holds), (GeometryCase::C, true));
        let g = run("u^2", "u^2+1").unwrap();
        assert_eq!((g.case, g.assumption1_holds), (GeometryCase::B, false));
        let g = run("-(u^2+1)", "1/(u^2+1)").unwrap();
        assert_eq!(g.case, GeometryCase::D);
        assert!(matches!(run("u", "-u"), Err(Error::UnsupportedGeometry(_))));
    }

    #[test]
    fn deficit_examples() {
        let (fl, fr) = (p("(1+2*u^2)/(1+u^2)"), p("-(1+2*u^2)/(1+u^2)"));
        assert_eq!(rh_deficit(&fl, &fr, 1.0, 1.0).unwrap(), 3.0);

        let k = rh_deficit(&p("sqrt(u^2+1)+1"), &p("1/sqrt(u^2+1)"), 1.0, 1.0).unwrap();
        assert!((k - (2.0 + 2f64.sqrt()) / 2.0).abs() <= 1e-12);

        assert_eq!(rh_deficit(&p("u"), &p("-u"), 1.0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn overcompressibility_examples() {
        let (fl, fr) = (p("(1+2*u^2)/(1+u^2)"), p("-(1+2*u^2)/(1+u^2)"));
        assert!(is_overcompressive(&fl, &fr, 1.0, 1.0).unwrap());
        assert!(!is_overcompressive(&p("u^2+1"), &p("-(u^2+1)"), -1.0, 1.0).unwrap());
        for (u0, u1) in [(-3.0, 2.0), (0.0, 0.0), (4.0, -4.0)] {
            assert!(is_overcompressive(&p("u"), &p("-u"), u0, u1).unwrap());
        }
        // the extremum itself passes
        assert!(is_overcompressive(&p("u^2"), &p("-u^2"), 0.0, 0.0).unwrap());
    }
}
