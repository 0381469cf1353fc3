//! Continuous problem description
//!
//! ```text
//!   eps u_xx + a u_x - b u_t - c u = e(x,t) u(x, t - tau) + f(x,t)
//! ```
//!
//! on `(0,1) x (0,T]` with `a(x,t) = a0(x,t) x^p`, `p >= 1`, history
//! `u = s` on `[0,1] x [-tau, 0]` and Dirichlet data `q0`, `q1` on the
//! lateral walls. Coefficients are expression trees over `(x, t)` with the
//! constants `p` and `tau` bound, so config-defined problems and the two
//! built-in test problems share one representation.

use alloc::format;
use alloc::string::String;

use crate::expr::{Bindings, EvalError, Expr};

/// Probe-grid resolution used for validation and coercivity estimates.
pub const PROBE_POINTS: usize = 101;

/// Relative slack for the `T = k tau` integrality check.
const HORIZON_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinId {
    Problem1,
    Problem2,
}

impl BuiltinId {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinId::Problem1 => "problem1",
            BuiltinId::Problem2 => "problem2",
        }
    }
}

/// Coefficient selector for [`ProblemSpec::sample`]. `A` is the composed
/// convection coefficient `a0(x,t) x^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    A,
    B,
    C,
    E,
    F,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("degeneracy exponent p must be >= 1, got {0}")]
    InvalidP(u32),
    #[error("epsilon must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("delay tau must be positive, got {0}")]
    InvalidTau(f64),
    #[error("horizon {horizon} must be an integer multiple (>= 2) of tau {tau}")]
    BadHorizon { horizon: f64, tau: f64 },
    #[error("coefficient `{field}` must stay >= {bound} on the domain, found {found}")]
    BoundViolated {
        field: &'static str,
        bound: f64,
        found: f64,
    },
    #[error("coefficient `{field}` must have a strictly positive lower bound, found {found}")]
    NotPositive { field: &'static str, found: f64 },
    #[error("field `{field}` failed to evaluate at (x={x}, t={t}): {source}")]
    FieldEval {
        field: &'static str,
        x: f64,
        t: f64,
        source: EvalError,
    },
    #[error("{what} out of domain: (x={x}, t={t})")]
    OutOfDomain { what: String, x: f64, t: f64 },
}

/// Immutable problem instance; safe to share between workers.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub label: String,
    pub epsilon: f64,
    pub p: u32,
    pub a0: Expr,
    pub b: Expr,
    pub c: Expr,
    pub e: Expr,
    pub f: Expr,
    pub s: Expr,
    pub q0: Expr,
    pub q1: Expr,
    pub tau: f64,
    pub horizon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Raw ingredients for a config-defined problem. Leave `alpha`/`beta`/
/// `gamma` unset to have them estimated as probe-grid minima of `a0`, `b`,
/// `c`.
#[derive(Debug, Clone)]
pub struct CustomProblem {
    pub label: String,
    pub epsilon: f64,
    pub p: u32,
    pub a0: Expr,
    pub b: Expr,
    pub c: Expr,
    pub e: Expr,
    pub f: Expr,
    pub s: Expr,
    pub q0: Expr,
    pub q1: Expr,
    pub tau: f64,
    pub horizon: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

impl ProblemSpec {
    /// The two test problems: both use `a0 = 1`, `b = 1`, history
    /// `s = (1-x)^2`, walls `q0 = 1 + t^2`, `q1 = 0`, `tau = 1`, `T = 2`.
    /// The first has `c = 1`, delay coefficient `0.5`, `f = x^2 - 1`; the
    /// second has `c = x + p`, delay coefficient `-1`,
    /// `f = p exp(-t)(x^2 - 1)`.
    pub fn builtin(id: BuiltinId, p: u32, epsilon: f64) -> Result<Self, ProblemError> {
        let parse = |src: &str| Expr::parse(src).expect("built-in expression");
        let (c, e, f, gamma) = match id {
            BuiltinId::Problem1 => (parse("1"), parse("0.5"), parse("x^2-1"), 1.0),
            BuiltinId::Problem2 => (
                parse("x+p"),
                parse("-1"),
                parse("p*exp(-t)*(x^2-1)"),
                p as f64,
            ),
        };
        let spec = ProblemSpec {
            label: String::from(id.name()),
            epsilon,
            p,
            a0: parse("1"),
            b: parse("1"),
            c,
            e,
            f,
            s: parse("(1-x)^2"),
            q0: parse("1+t^2"),
            q1: parse("0"),
            tau: 1.0,
            horizon: 2.0,
            alpha: 1.0,
            beta: 1.0,
            gamma,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn custom(raw: CustomProblem) -> Result<Self, ProblemError> {
        let mut spec = ProblemSpec {
            label: raw.label,
            epsilon: raw.epsilon,
            p: raw.p,
            a0: raw.a0,
            b: raw.b,
            c: raw.c,
            e: raw.e,
            f: raw.f,
            s: raw.s,
            q0: raw.q0,
            q1: raw.q1,
            tau: raw.tau,
            horizon: raw.horizon,
            alpha: raw.alpha.unwrap_or(0.0),
            beta: raw.beta.unwrap_or(0.0),
            gamma: raw.gamma.unwrap_or(0.0),
        };
        spec.check_scalars()?;
        let (min_a0, _) = spec.probe_extrema("a0", &spec.a0, 0.0, spec.horizon)?;
        let (min_b, _) = spec.probe_extrema("b", &spec.b, 0.0, spec.horizon)?;
        let (min_c, _) = spec.probe_extrema("c", &spec.c, 0.0, spec.horizon)?;
        if raw.alpha.is_none() {
            spec.alpha = min_a0;
        }
        if raw.beta.is_none() {
            spec.beta = min_b;
        }
        if raw.gamma.is_none() {
            spec.gamma = min_c;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn check_scalars(&self) -> Result<(), ProblemError> {
        if self.p < 1 {
            return Err(ProblemError::InvalidP(self.p));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(ProblemError::InvalidEpsilon(self.epsilon));
        }
        if !(self.tau > 0.0) {
            return Err(ProblemError::InvalidTau(self.tau));
        }
        let ratio = self.horizon / self.tau;
        let k = crate::real::round(ratio);
        if k < 2.0 || (ratio - k).abs() > HORIZON_TOL * ratio.abs() {
            return Err(ProblemError::BadHorizon {
                horizon: self.horizon,
                tau: self.tau,
            });
        }
        Ok(())
    }

    /// Probe-grid validation: scalar constraints, lower bounds of `a0`,
    /// `b`, `c`, and evaluability of every field on its own domain.
    fn validate(&self) -> Result<(), ProblemError> {
        self.check_scalars()?;
        let t_hi = self.horizon;
        let checks: [(&'static str, &Expr, f64); 3] = [
            ("a0", &self.a0, self.alpha),
            ("b", &self.b, self.beta),
            ("c", &self.c, self.gamma),
        ];
        for (name, expr, bound) in checks {
            let (min, _) = self.probe_extrema(name, expr, 0.0, t_hi)?;
            if !(bound > 0.0) {
                return Err(ProblemError::NotPositive {
                    field: name,
                    found: bound,
                });
            }
            if min < bound - 1e-12 {
                return Err(ProblemError::BoundViolated {
                    field: name,
                    bound,
                    found: min,
                });
            }
        }
        self.probe_extrema("e", &self.e, 0.0, t_hi)?;
        self.probe_extrema("f", &self.f, 0.0, t_hi)?;
        self.probe_extrema("s", &self.s, -self.tau, 0.0)?;
        self.probe_extrema("q0", &self.q0, 0.0, t_hi)?;
        self.probe_extrema("q1", &self.q1, 0.0, t_hi)?;
        Ok(())
    }

    /// Min/max of a field over `[0,1] x [t_lo, t_hi]` on the probe grid.
    fn probe_extrema(
        &self,
        name: &'static str,
        expr: &Expr,
        t_lo: f64,
        t_hi: f64,
    ) -> Result<(f64, f64), ProblemError> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let last = (PROBE_POINTS - 1) as f64;
        for j in 0..PROBE_POINTS {
            let x = j as f64 / last;
            for k in 0..PROBE_POINTS {
                let t = t_lo + (t_hi - t_lo) * (k as f64 / last);
                let v =
                    expr.eval(&self.bindings(x, t))
                        .map_err(|source| ProblemError::FieldEval {
                            field: name,
                            x,
                            t,
                            source,
                        })?;
                min = min.min(v);
                max = max.max(v);
            }
        }
        Ok((min, max))
    }

    /// Probe-grid extrema of the composed convection coefficient
    /// `a0(x,t) x^p` over `[x_lo, 1] x [0, T]`.
    pub fn convection_extrema(&self, x_lo: f64) -> Result<(f64, f64), ProblemError> {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let last = (PROBE_POINTS - 1) as f64;
        for j in 0..PROBE_POINTS {
            let x = x_lo + (1.0 - x_lo) * (j as f64 / last);
            for k in 0..PROBE_POINTS {
                let t = self.horizon * (k as f64 / last);
                let v =
                    self.eval_field("a0", &self.a0, x, t)? * crate::real::powi(x, self.p as i32);
                min = min.min(v);
                max = max.max(v);
            }
        }
        Ok((min, max))
    }

    /// Probe-grid extrema of the bare factor `a0` over `[0,1] x [0,T]`.
    pub fn a0_extrema(&self) -> Result<(f64, f64), ProblemError> {
        self.probe_extrema("a0", &self.a0, 0.0, self.horizon)
    }

    /// Minimum of the composed convection coefficient `a0(x,t) x^p` over the
    /// given x locations, with t sampled on the probe grid.
    pub fn convection_floor(&self, xs: &[f64]) -> Result<f64, ProblemError> {
        let mut min = f64::INFINITY;
        let last = (PROBE_POINTS - 1) as f64;
        for &x in xs {
            for k in 0..PROBE_POINTS {
                let t = self.horizon * (k as f64 / last);
                let v =
                    self.eval_field("a0", &self.a0, x, t)? * crate::real::powi(x, self.p as i32);
                min = min.min(v);
            }
        }
        Ok(min)
    }

    /// Probe-grid maximum of `|field|` over `[0,1] x [0,T]`.
    pub fn sup_abs(&self, field: Field) -> Result<f64, ProblemError> {
        let (name, expr) = self.field_expr(field);
        if let Field::A = field {
            let (min, max) = self.convection_extrema(0.0)?;
            return Ok(min.abs().max(max.abs()));
        }
        let (min, max) = self.probe_extrema(name, expr, 0.0, self.horizon)?;
        Ok(min.abs().max(max.abs()))
    }

    fn bindings(&self, x: f64, t: f64) -> Bindings {
        Bindings::all(x, t, self.p as f64, self.tau)
    }

    fn field_expr(&self, field: Field) -> (&'static str, &Expr) {
        match field {
            Field::A => ("a0", &self.a0),
            Field::B => ("b", &self.b),
            Field::C => ("c", &self.c),
            Field::E => ("e", &self.e),
            Field::F => ("f", &self.f),
        }
    }

    fn eval_field(
        &self,
        name: &'static str,
        expr: &Expr,
        x: f64,
        t: f64,
    ) -> Result<f64, ProblemError> {
        expr.eval(&self.bindings(x, t))
            .map_err(|source| ProblemError::FieldEval {
                field: name,
                x,
                t,
                source,
            })
    }

    /// Evaluate a coefficient at a domain point; `Field::A` composes
    /// `a0(x,t) x^p`.
    pub fn sample(&self, field: Field, x: f64, t: f64) -> Result<f64, ProblemError> {
        let (name, expr) = self.field_expr(field);
        if !(0.0..=1.0).contains(&x) || !(0.0..=self.horizon).contains(&t) {
            return Err(ProblemError::OutOfDomain {
                what: format!("coefficient `{name}`"),
                x,
                t,
            });
        }
        let v = self.eval_field(name, expr, x, t)?;
        Ok(match field {
            Field::A => v * crate::real::powi(x, self.p as i32),
            _ => v,
        })
    }

    /// History data `s(x, t)` for `t` in `[-tau, 0]`.
    pub fn history(&self, x: f64, t: f64) -> Result<f64, ProblemError> {
        if !(0.0..=1.0).contains(&x) || !(-self.tau..=0.0).contains(&t) {
            return Err(ProblemError::OutOfDomain {
                what: String::from("history `s`"),
                x,
                t,
            });
        }
        self.eval_field("s", &self.s, x, t)
    }

    /// Left wall `q0(t)`, `t` in `[0, T]`.
    pub fn boundary_left(&self, t: f64) -> Result<f64, ProblemError> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(ProblemError::OutOfDomain {
                what: String::from("boundary `q0`"),
                x: 0.0,
                t,
            });
        }
        self.eval_field("q0", &self.q0, 0.0, t)
    }

    /// Right wall `q1(t)`, `t` in `[0, T]`.
    pub fn boundary_right(&self, t: f64) -> Result<f64, ProblemError> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(ProblemError::OutOfDomain {
                what: String::from("boundary `q1`"),
                x: 1.0,
                t,
            });
        }
        self.eval_field("q1", &self.q1, 1.0, t)
    }

    /// Number of delay intervals in the horizon (`T = k tau`).
    pub fn delay_ratio(&self) -> usize {
        crate::real::round(self.horizon / self.tau) as usize
    }
}
