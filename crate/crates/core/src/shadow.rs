//! Stationary shadow waves: the table of admissible exponents and
//! coefficients, the piecewise-constant ε-net, its strength, the
//! algebraic residual system and a quadrature check of the weak form.

use std::fmt;

use serde::Serialize;

use crate::fluxlang::FluxExpr;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ShadowKind {
    DeltaShock,
    SingularShock,
}

/// One row of the shadow-wave table, keyed by the asymptotic sign `χ` of
/// the right flux and the growth exponents `ν₁` (left), `ν₂` (right).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TableRow {
    /// χ=1, ν₁<1, ν₂<1
    PlusBothSub,
    /// χ=1, ν₁<1, ν₂≥1
    PlusLeftSub,
    /// χ=1, ν₁≥1, ν₂<1
    PlusRightSub,
    /// χ=−1, ν₁<1, ν₂<1
    MinusBothSub,
    /// χ=−1, ν₁<1, ν₂≥1
    MinusLeftSub,
    /// χ=−1, ν₁≥1, ν₂<1
    MinusRightSub,
    /// χ=−1, ν₁=1, ν₂>1
    MinusLeftLinear,
    /// χ=−1, ν₁>1, ν₂=1
    MinusRightLinear,
    /// χ=−1, ν₁=ν₂∈[1,2)
    MinusEqual,
    /// χ=−1, 1<ν₁<ν₂<2
    MinusLeftSlower,
    /// χ=−1, 1<ν₂<ν₁<2
    MinusRightSlower,
}

impl TableRow {
    pub const ALL: [TableRow; 11] = [
        TableRow::PlusBothSub,
        TableRow::PlusLeftSub,
        TableRow::PlusRightSub,
        TableRow::MinusBothSub,
        TableRow::MinusLeftSub,
        TableRow::MinusRightSub,
        TableRow::MinusLeftLinear,
        TableRow::MinusRightLinear,
        TableRow::MinusEqual,
        TableRow::MinusLeftSlower,
        TableRow::MinusRightSlower,
    ];

    /// Pick the row for `(ν₁, ν₂, χ)`. Exponents are compared exactly, so
    /// callers should round estimated exponents first.
    pub fn select(nu1: f64, nu2: f64, chi: i8) -> Result<TableRow> {
        if !(nu1 >= 0.0 && nu2 >= 0.0 && nu1.is_finite() && nu2.is_finite()) {
            return Err(Error::invalid(format!(
                "growth exponents must be finite and non-negative, got nu1 = {nu1}, nu2 = {nu2}"
            )));
        }
        use TableRow::*;
        let row = match chi {
            1 => match (nu1 < 1.0, nu2 < 1.0) {
                (true, true) => PlusBothSub,
                (true, false) => PlusLeftSub,
                (false, true) => PlusRightSub,
                (false, false) => {
                    return Err(Error::NoTableRow(format!(
                        "chi = 1 requires min(nu1, nu2) < 1, got nu1 = {nu1}, nu2 = {nu2}"
                    )))
                }
            },
            -1 => {
                if nu1 < 1.0 && nu2 < 1.0 {
                    MinusBothSub
                } else if nu1 < 1.0 {
                    MinusLeftSub
                } else if nu2 < 1.0 {
                    MinusRightSub
                } else if nu1 == nu2 && nu1 < 2.0 {
                    MinusEqual
                } else if nu1 == 1.0 {
                    MinusLeftLinear
                } else if nu2 == 1.0 {
                    MinusRightLinear
                } else if nu1 < 2.0 && nu2 < 2.0 {
                    if nu1 < nu2 {
                        MinusLeftSlower
                    } else {
                        MinusRightSlower
                    }
                } else {
                    return Err(Error::NoTableRow(format!(
                        "chi = -1 with nu1, nu2 > 1 requires both in [1, 2), got nu1 = {nu1}, nu2 = {nu2}"
                    )));
                }
            }
            _ => return Err(Error::invalid(format!("chi must be +1 or -1, got {chi}"))),
        };
        Ok(row)
    }

    pub fn chi(self) -> i8 {
        use TableRow::*;
        match self {
            PlusBothSub | PlusLeftSub | PlusRightSub => 1,
            _ => -1,
        }
    }

    pub fn label(self) -> &'static str {
        use TableRow::*;
        match self {
            PlusBothSub => "χ=1, ν₁<1, ν₂<1",
            PlusLeftSub => "χ=1, ν₁<1, ν₂≥1",
            PlusRightSub => "χ=1, ν₁≥1, ν₂<1",
            MinusBothSub => "χ=−1, ν₁<1, ν₂<1",
            MinusLeftSub => "χ=−1, ν₁<1, ν₂≥1",
            MinusRightSub => "χ=−1, ν₁≥1, ν₂<1",
            MinusLeftLinear => "χ=−1, ν₁=1, ν₂≥1",
            MinusRightLinear => "χ=−1, ν₁≥1, ν₂=1",
            MinusEqual => "χ=−1, ν₁=ν₂∈[1,2)",
            MinusLeftSlower => "χ=−1, ν₁,ν₂∈[1,2), ν₁<ν₂",
            MinusRightSlower => "χ=−1, ν₁,ν₂∈[1,2), ν₁>ν₂",
        }
    }

    /// Wave kind printed in the table for this row.
    pub fn tabulated_kind(self) -> ShadowKind {
        use TableRow::*;
        match self {
            MinusLeftLinear | MinusRightLinear | MinusLeftSlower | MinusRightSlower => {
                ShadowKind::SingularShock
            }
            _ => ShadowKind::DeltaShock,
        }
    }
}

impl fmt::Display for TableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The growth hypothesis under which the existence result is stated:
/// `min(ν₁,ν₂) < 1` for `χ=1`, `ν₁ = ν₂ ∈ [0,2)` for `χ=−1`.
/// Several table rows lie outside it for `χ=−1`.
pub fn growth_hypothesis_holds(nu1: f64, nu2: f64, chi: i8) -> bool {
    if chi == 1 {
        nu1.min(nu2) < 1.0
    } else {
        nu1 == nu2 && (0.0..2.0).contains(&nu1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShadowProfile {
    pub alpha: f64,
    pub beta: f64,
    pub xi0: f64,
    pub xi1: f64,
    pub kappa: f64,
    pub kind: ShadowKind,
    pub table_row: TableRow,
}

impl ShadowProfile {
    /// `lim ε·(ξ₀ε^{−α} + ξ₁ε^{−β})`: the ξ carried by unit exponents.
    pub fn delta_coefficient(&self) -> f64 {
        let mut s = 0.0;
        if self.alpha == 1.0 {
            s += self.xi0;
        }
        if self.beta == 1.0 {
            s += self.xi1;
        }
        s
    }
}

fn kind_of(alpha: f64, xi0: f64, beta: f64, xi1: f64) -> ShadowKind {
    let minor = |e: f64, xi: f64| xi > 0.0 && e > 0.0 && e < 1.0;
    if minor(alpha, xi0) || minor(beta, xi1) {
        ShadowKind::SingularShock
    } else {
        ShadowKind::DeltaShock
    }
}

/// Solve the exponent/coefficient system for the applicable table row.
pub fn classify_shadow(nu1: f64, nu2: f64, chi: i8, kappa: f64, c1: f64, c2: f64) -> Result<ShadowProfile> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    if !(c1.is_finite() && c1 > 0.0 && c2.is_finite() && c2 > 0.0) {
        return Err(Error::invalid(format!(
            "asymptotic constants must be positive, got c1 = {c1}, c2 = {c2}"
        )));
    }
    let row = TableRow::select(nu1, nu2, chi)?;
    use TableRow::*;
    let (alpha, beta, xi0, xi1) = match row {
        PlusBothSub | MinusBothSub => (1.0, 1.0, 0.5 * kappa, 0.5 * kappa),
        PlusLeftSub | MinusLeftSub => (1.0, 0.0, kappa, 0.0),
        PlusRightSub | MinusRightSub => (0.0, 1.0, 0.0, kappa),
        MinusLeftLinear => (1.0, 1.0 / nu2, kappa, (c1 * kappa / c2).powf(1.0 / nu2)),
        MinusRightLinear => (1.0 / nu1, 1.0, (c2 * kappa / c1).powf(1.0 / nu1), kappa),
        MinusEqual => {
            let r = (c2 / c1).powf(1.0 / nu1);
            (1.0, 1.0, kappa * r / (1.0 + r), kappa / (1.0 + r))
        }
        MinusLeftSlower => (
            1.0,
            nu1 / nu2,
            kappa,
            (c1 * kappa.powf(nu1) / c2).powf(1.0 / nu2),
        ),
        MinusRightSlower => (
            nu2 / nu1,
            1.0,
            (c2 * kappa.powf(nu2) / c1).powf(1.0 / nu1),
            kappa,
        ),
    };
    Ok(ShadowProfile {
        alpha,
        beta,
        xi0,
        xi1,
        kappa,
        kind: kind_of(alpha, xi0, beta, xi1),
        table_row: row,
    })
}

/// Stationary shadow wave between outer states `u0` (left) and `u1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShadowWaveNet {
    pub u0: f64,
    pub u1: f64,
    pub profile: ShadowProfile,
    pub speed: f64,
}

impl ShadowWaveNet {
    pub fn new(u0: f64, u1: f64, profile: ShadowProfile) -> Self {
        ShadowWaveNet {
            u0,
            u1,
            profile,
            speed: 0.0,
        }
    }

    /// `(u₀,ε, u₁,ε)`.
    pub fn intermediate(&self, eps: f64) -> (f64, f64) {
        let p = &self.profile;
        (
            self.u0 + p.xi0 * eps.powf(-p.alpha),
            self.u1 + p.xi1 * eps.powf(-p.beta),
        )
    }

    /// Value of the ε-net at `(x, t)`; points on a line go to the left piece.
    pub fn sample(&self, eps: f64, x: f64, t: f64) -> f64 {
        let w = eps * t;
        let (a, b) = self.intermediate(eps);
        if x <= -w {
            self.u0
        } else if x <= 0.0 {
            a
        } else if x <= w {
            b
        } else {
            self.u1
        }
    }

    /// Mass carried by the ε-fan, `ε(u₀,ε + u₁,ε)t`.
    pub fn strength(&self, eps: f64, t: f64) -> f64 {
        let (a, b) = self.intermediate(eps);
        eps * (a + b) * t
    }

    /// `ε → 0` limit of [`strength`](Self::strength).
    pub fn strength_limit(&self, t: f64) -> f64 {
        self.profile.delta_coefficient() * t
    }
}

/// A single term `coef·ε^exponent` of a residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub exponent: f64,
}

/// Growth data `(ν₁, c₁, ν₂, c₂, χ)` entering the residual system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub nu1: f64,
    pub c1: f64,
    pub nu2: f64,
    pub c2: f64,
    pub chi: i8,
}

/// Terms of the three residuals (the first carries `−κ` at exponent 0).
/// Components with `ξ = 0` contribute nothing.
pub fn residual_terms(p: &ShadowProfile, g: Growth) -> [Vec<Term>; 3] {
    let chi = f64::from(g.chi);
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    let mut r3 = Vec::new();
    if p.xi0 > 0.0 {
        let a = g.c1 * p.xi0.powf(g.nu1);
        r1.push(Term { coef: p.xi0, exponent: 1.0 - p.alpha });
        r2.push(Term { coef: a, exponent: 1.0 - g.nu1 * p.alpha });
        r3.push(Term { coef: a, exponent: 2.0 - g.nu1 * p.alpha });
    }
    if p.xi1 > 0.0 {
        let b = chi * g.c2 * p.xi1.powf(g.nu2);
        r1.push(Term { coef: p.xi1, exponent: 1.0 - p.beta });
        r2.push(Term { coef: b, exponent: 1.0 - g.nu2 * p.beta });
        r3.push(Term { coef: -b, exponent: 2.0 - g.nu2 * p.beta });
    }
    r1.push(Term {
        coef: -p.kappa,
        exponent: 0.0,
    });
    [r1, r2, r3]
}

/// `(r1, r2, r3)` evaluated literally at `eps`.
pub fn system_residuals(p: &ShadowProfile, g: Growth, eps: f64) -> [f64; 3] {
    residual_terms(p, g).map(|terms| {
        terms
            .iter()
            .fold(0.0, |s, t| s + t.coef * eps.powf(t.exponent))
            .abs()
    })
}

/// Terms with (numerically) equal exponents merged; groups whose
/// coefficients cancel are removed. An empty result means the residual
/// vanishes identically in `ε`.
pub fn collect_terms(terms: &[Term]) -> Vec<Term> {
    let mut groups: Vec<(Term, f64)> = Vec::new();
    for t in terms {
        match groups
            .iter_mut()
            .find(|(g, _)| (g.exponent - t.exponent).abs() <= 1e-12 * (1.0 + t.exponent.abs()))
        {
            Some((g, mag)) => {
                g.coef += t.coef;
                *mag += t.coef.abs();
            }
            None => groups.push((*t, t.coef.abs())),
        }
    }
    groups
        .into_iter()
        .filter(|(g, mag)| g.coef.abs() > 1e-12 * mag)
        .map(|(g, _)| g)
        .collect()
}

/// `Σ|C_p|·ε^p` over the collected terms; bounds the residual and, unlike
/// the literal value, is free of cancellation noise.
pub fn residual_majorant(collected: &[Term], eps: f64) -> f64 {
    collected
        .iter()
        .map(|t| t.coef.abs() * eps.powf(t.exponent))
        .sum()
}

/// Smooth bump supported on `[x_a,x_b]×[t_a,t_b]` with maximum 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFunction {
    pub x_a: f64,
    pub x_b: f64,
    pub t_a: f64,
    pub t_b: f64,
}

fn bump(s: f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let norm = half.powi(6);
    let q = (s - a) * (b - s);
    let dq = (b - s) - (s - a);
    (q.powi(3) / norm, 3.0 * q * q * dq / norm)
}

impl TestFunction {
    pub fn new(x_a: f64, x_b: f64, t_a: f64, t_b: f64) -> Result<Self> {
        if !(x_a < x_b && t_a < t_b && x_a.is_finite() && x_b.is_finite() && t_b.is_finite()) {
            return Err(Error::invalid("test-function support must be a proper rectangle"));
        }
        if t_a <= 0.0 {
            return Err(Error::invalid("test-function support must lie in t > 0"));
        }
        Ok(TestFunction { x_a, x_b, t_a, t_b })
    }

    /// `(φ, φ_x, φ_t)` at `(x, t)`; zero outside the support.
    pub fn eval(&self, x: f64, t: f64) -> (f64, f64, f64) {
        if x < self.x_a || x > self.x_b || t < self.t_a || t > self.t_b {
            return (0.0, 0.0, 0.0);
        }
        let (px, dpx) = bump(x, self.x_a, self.x_b);
        let (pt, dpt) = bump(t, self.t_a, self.t_b);
        (px * pt, dpx * pt, px * dpt)
    }
}

fn simpson_weights(n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    })
}

fn simpson(a: f64, b: f64, n: usize, mut g: impl FnMut(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    let s: f64 = simpson_weights(n)
        .enumerate()
        .map(|(i, w)| w * g(if i == n { b } else { a + i as f64 * h }))
        .sum();
    s * h / 3.0
}

/// `|∬ (u_ε φ_t + f(x, u_ε) φ_x) dx dt|` over the support of `phi`, with
/// `quad_n` Simpson intervals per axis on every smooth panel.
pub fn weak_residual(
    net: &ShadowWaveNet,
    f_l: &FluxExpr,
    f_r: &FluxExpr,
    phi: &TestFunction,
    eps: f64,
    quad_n: usize,
) -> Result<f64> {
    if quad_n < 128 || quad_n % 2 == 1 {
        return Err(Error::invalid(format!(
            "quad_n = {quad_n} must be even and at least 128"
        )));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let reach = eps * phi.t_b;
    if -reach <= phi.x_a || reach >= phi.x_b {
        return Err(Error::DegeneratePanel(format!(
            "eps*t = {reach} reaches the x-support [{}, {}]",
            phi.x_a, phi.x_b
        )));
    }
    let (a, b) = net.intermediate(eps);
    // (state, flux) on the four panels left to right
    let pieces = [
        (net.u0, f_l.eval(net.u0)?),
        (a, f_l.eval(a)?),
        (b, f_r.eval(b)?),
        (net.u1, f_r.eval(net.u1)?),
    ];
    let inner = |t: f64| {
        let w = eps * t;
        let edges = [phi.x_a, -w, 0.0, w, phi.x_b];
        let mut s = 0.0;
        for (k, &(u, flux)) in pieces.iter().enumerate() {
            s += simpson(edges[k], edges[k + 1], quad_n, |x| {
                let (_, px, pt) = phi.eval(x, t);
                u * pt + flux * px
            });
        }
        s
    };
    Ok(simpson(phi.t_a, phi.t_b, quad_n, inner).abs())
}
