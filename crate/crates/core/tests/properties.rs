//! Randomized properties for the expression language, the tridiagonal
//! solver, and the mesh/grid constructions.

use proptest::prelude::*;

use spdd_core::analysis::order;
use spdd_core::expr::{BinOp, Bindings, Expr, Func, Var};
use spdd_core::linalg::{residual_inf, thomas_solve, TridiagonalSystem};
use spdd_core::mesh::{FactorChoice, SpatialMesh, TimeGrid};

fn arb_var() -> impl Strategy<Value = Var> {
    prop_oneof![Just(Var::X), Just(Var::T), Just(Var::P), Just(Var::Tau)]
}

fn arb_func() -> impl Strategy<Value = Func> {
    prop_oneof![
        Just(Func::Exp),
        Just(Func::Sin),
        Just(Func::Cos),
        Just(Func::Ln),
        Just(Func::Sqrt),
        Just(Func::Abs),
    ]
}

fn arb_binop() -> impl Strategy<Value = BinOp> {
    prop_oneof![
        Just(BinOp::Add),
        Just(BinOp::Sub),
        Just(BinOp::Mul),
        Just(BinOp::Div),
        Just(BinOp::Pow),
    ]
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-8.0..8.0f64).prop_map(Expr::Lit),
        (0u32..5).prop_map(|k| Expr::Lit(k as f64)),
        arb_var().prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 40, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (arb_func(), inner.clone()).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            (arb_binop(), inner.clone(), inner).prop_map(|(op, l, r)| Expr::Bin(
                op,
                Box::new(l),
                Box::new(r)
            )),
        ]
    })
}

fn binding_grid() -> [Bindings; 4] {
    [
        Bindings::all(0.3, 0.7, 2.0, 1.0),
        Bindings::all(0.0, 0.0, 1.0, 1.0),
        Bindings::all(-1.5, 2.0, 3.0, 0.5),
        Bindings::all(1.0, -0.25, 6.0, 2.0),
    ]
}

/// Independent evaluator: a shunting-yard pass over the printed text.
/// Arithmetic mirrors the tree evaluator (same division and power
/// domain rules), so any disagreement points at the parser or printer.
mod oracle {
    enum Op {
        Bin(char),
        Neg,
        Fun(&'static str),
        Mark,
    }

    fn prec(op: &Op) -> u8 {
        match op {
            Op::Bin('+') | Op::Bin('-') => 1,
            Op::Bin('*') | Op::Bin('/') => 2,
            Op::Neg => 3,
            Op::Bin('^') => 4,
            _ => 0,
        }
    }

    fn right_assoc(c: char) -> bool {
        c == '^'
    }

    fn apply_bin(c: char, a: f64, b: f64) -> Result<f64, ()> {
        let v = match c {
            '+' => a + b,
            '-' => a - b,
            '*' => a * b,
            '/' => {
                if b == 0.0 {
                    return Err(());
                }
                a / b
            }
            '^' => {
                if b == b.round() && b.abs() <= i32::MAX as f64 {
                    if a == 0.0 && b < 0.0 {
                        return Err(());
                    }
                    a.powi(b as i32)
                } else if a < 0.0 {
                    return Err(());
                } else {
                    a.powf(b)
                }
            }
            _ => unreachable!(),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(())
        }
    }

    fn apply_fun(name: &str, a: f64) -> Result<f64, ()> {
        let v = match name {
            "exp" => a.exp(),
            "sin" => a.sin(),
            "cos" => a.cos(),
            "ln" => {
                if a <= 0.0 {
                    return Err(());
                }
                a.ln()
            }
            "sqrt" => {
                if a < 0.0 {
                    return Err(());
                }
                a.sqrt()
            }
            "abs" => a.abs(),
            _ => return Err(()),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(())
        }
    }

    fn pop_once(ops: &mut Vec<Op>, vals: &mut Vec<f64>) -> Result<(), ()> {
        match ops.pop().ok_or(())? {
            Op::Bin(c) => {
                let b = vals.pop().ok_or(())?;
                let a = vals.pop().ok_or(())?;
                vals.push(apply_bin(c, a, b)?);
            }
            Op::Neg => {
                let a = vals.pop().ok_or(())?;
                vals.push(-a);
            }
            Op::Fun(name) => {
                let a = vals.pop().ok_or(())?;
                vals.push(apply_fun(name, a)?);
            }
            Op::Mark => return Err(()),
        }
        Ok(())
    }

    /// Evaluate printed expression text; `Err` covers both syntax and
    /// domain failures.
    pub fn eval(src: &str, x: f64, t: f64, p: f64, tau: f64) -> Result<f64, ()> {
        let bytes = src.as_bytes();
        let mut pos = 0usize;
        let mut vals: Vec<f64> = Vec::new();
        let mut ops: Vec<Op> = Vec::new();
        let mut expect_operand = true;
        while pos < bytes.len() {
            let c = bytes[pos];
            if c.is_ascii_whitespace() {
                pos += 1;
            } else if c.is_ascii_digit() || c == b'.' {
                let start = pos;
                while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.') {
                    pos += 1;
                }
                let v: f64 = src[start..pos].parse().map_err(|_| ())?;
                vals.push(v);
                expect_operand = false;
            } else if c.is_ascii_alphabetic() {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_alphabetic() {
                    pos += 1;
                }
                let name = &src[start..pos];
                match name {
                    "x" => vals.push(x),
                    "t" => vals.push(t),
                    "p" => vals.push(p),
                    "tau" => vals.push(tau),
                    "exp" | "sin" | "cos" | "ln" | "sqrt" | "abs" => {
                        if pos >= bytes.len() || bytes[pos] != b'(' {
                            return Err(());
                        }
                        let leaked: &'static str = match name {
                            "exp" => "exp",
                            "sin" => "sin",
                            "cos" => "cos",
                            "ln" => "ln",
                            "sqrt" => "sqrt",
                            _ => "abs",
                        };
                        ops.push(Op::Fun(leaked));
                        ops.push(Op::Mark);
                        pos += 1;
                        expect_operand = true;
                        continue;
                    }
                    _ => return Err(()),
                }
                expect_operand = false;
            } else if c == b'(' {
                ops.push(Op::Mark);
                pos += 1;
                expect_operand = true;
            } else if c == b')' {
                while !matches!(ops.last(), Some(Op::Mark) | None) {
                    pop_once(&mut ops, &mut vals)?;
                }
                if ops.pop().is_none() {
                    return Err(());
                }
                if matches!(ops.last(), Some(Op::Fun(_))) {
                    pop_once(&mut ops, &mut vals)?;
                }
                pos += 1;
                expect_operand = false;
            } else if c == b'-' && expect_operand {
                ops.push(Op::Neg);
                pos += 1;
            } else if matches!(c, b'+' | b'-' | b'*' | b'/' | b'^') {
                let cur = prec(&Op::Bin(c as char));
                loop {
                    let Some(top) = ops.last() else { break };
                    let tp = prec(top);
                    let pop = if right_assoc(c as char) {
                        tp > cur
                    } else {
                        tp >= cur
                    };
                    if matches!(top, Op::Mark | Op::Fun(_)) || !pop {
                        break;
                    }
                    pop_once(&mut ops, &mut vals)?;
                }
                ops.push(Op::Bin(c as char));
                pos += 1;
                expect_operand = true;
            } else {
                return Err(());
            }
        }
        while !ops.is_empty() {
            pop_once(&mut ops, &mut vals)?;
        }
        if vals.len() != 1 {
            return Err(());
        }
        Ok(vals[0])
    }
}

proptest! {
    /// The minimal-paren printer emits text that parses back to an
    /// expression with identical values everywhere.
    #[test]
    fn printed_form_reparses_to_the_same_values(e in arb_expr()) {
        let printed = e.to_string();
        let reparsed = Expr::parse(&printed)
            .unwrap_or_else(|err| panic!("`{printed}` failed to reparse: {err}"));
        for b in binding_grid() {
            match (e.eval(&b), reparsed.eval(&b)) {
                (Ok(u), Ok(v)) => prop_assert_eq!(
                    u.to_bits(), v.to_bits(),
                    "`{}` evals to {} before and {} after reparsing", printed, u, v
                ),
                (Err(_), Err(_)) => {}
                (u, v) => prop_assert!(false, "`{printed}`: {u:?} vs {v:?}"),
            }
        }
    }

    /// Tree evaluation agrees with a stack evaluator that never builds
    /// a tree (power goes through a different routine, hence the small
    /// tolerance instead of bit equality).
    #[test]
    fn eval_matches_an_independent_stack_evaluator(e in arb_expr()) {
        let printed = e.to_string();
        for b in binding_grid() {
            let reference = oracle::eval(
                &printed,
                b.x.unwrap(),
                b.t.unwrap(),
                b.p.unwrap(),
                b.tau.unwrap(),
            );
            match (e.eval(&b), reference) {
                (Ok(u), Ok(v)) => {
                    let tol = 1e-12 * (1.0 + u.abs().max(v.abs()));
                    prop_assert!(
                        (u - v).abs() <= tol,
                        "`{printed}`: tree {u} vs stack {v}"
                    );
                }
                (Err(_), Err(())) => {}
                (u, v) => prop_assert!(false, "`{printed}`: {u:?} vs {v:?}"),
            }
        }
    }

    /// Unbound variables only matter when the expression mentions them.
    #[test]
    fn unused_variables_never_block_evaluation(e in arb_expr()) {
        let full = Bindings::all(0.42, 1.3, 2.0, 1.0);
        let mut masked = full;
        if !e.depends_on(Var::X) {
            masked.x = None;
        }
        if !e.depends_on(Var::T) {
            masked.t = None;
        }
        match (e.eval(&full), e.eval(&masked)) {
            (Ok(u), Ok(v)) => prop_assert_eq!(u.to_bits(), v.to_bits()),
            (Err(_), Err(_)) => {}
            (u, v) => prop_assert!(false, "{u:?} vs {v:?}"),
        }
    }

    /// Arbitrary text never panics the parser, and whatever parses
    /// prints back to an equivalent expression.
    #[test]
    fn parser_is_total_over_garbage(src in "[xtpau0-9+*/^()., eEsincoqrlb-]{0,40}") {
        if let Ok(e) = Expr::parse(&src) {
            let printed = e.to_string();
            let again = Expr::parse(&printed)
                .unwrap_or_else(|err| panic!("`{printed}` failed to reparse: {err}"));
            let b = Bindings::all(0.5, 0.25, 2.0, 1.0);
            match (e.eval(&b), again.eval(&b)) {
                (Ok(u), Ok(v)) => prop_assert_eq!(u.to_bits(), v.to_bits()),
                (Err(_), Err(_)) => {}
                (u, v) => prop_assert!(false, "`{src}` -> `{printed}`: {u:?} vs {v:?}"),
            }
        }
    }

    /// Thomas elimination leaves a tiny residual on strictly dominant
    /// systems of any size.
    #[test]
    fn thomas_leaves_tiny_residuals(
        rows in prop::collection::vec(
            (-1.0..1.0f64, -1.0..1.0f64, 0.1..2.0f64, -5.0..5.0f64, any::<bool>()),
            1..50,
        )
    ) {
        let n = rows.len();
        let mut sys = TridiagonalSystem::zeroed(n);
        for (i, &(sub, sup, margin, rhs, flip)) in rows.iter().enumerate() {
            sys.sub[i] = sub;
            sys.sup[i] = sup;
            let dominant = sub.abs() + sup.abs() + margin;
            sys.diag[i] = if flip { -dominant } else { dominant };
            sys.rhs[i] = rhs;
        }
        let x = thomas_solve(&sys).expect("dominant system is nonsingular");
        prop_assert!(residual_inf(&sys, &x) <= 1e-9);
    }

    /// Bisecting a layer mesh reproduces every original node bit for
    /// bit at the even indices, for any admissible parameter combination.
    #[test]
    fn bisection_nests_nodes_bitwise(
        k in 2u32..=8,
        j in 0i32..=40,
        sigma0 in 0.5..8.0f64,
        minimal in any::<bool>(),
    ) {
        let n = 2usize.pow(k);
        let factor = if minimal {
            FactorChoice::MinimalAdmissible
        } else {
            FactorChoice::LnN
        };
        let mesh = SpatialMesh::shishkin(n, 2f64.powi(-j), sigma0, factor).unwrap();
        prop_assert_eq!(mesh.nodes.len(), n + 1);
        prop_assert_eq!(mesh.nodes[0].to_bits(), 0f64.to_bits());
        prop_assert_eq!(mesh.nodes[n].to_bits(), 1f64.to_bits());
        for w in mesh.nodes.windows(2) {
            prop_assert!(w[0] < w[1], "nodes must increase: {} !< {}", w[0], w[1]);
        }
        let fine = mesh.bisect();
        prop_assert_eq!(fine.n, 2 * n);
        prop_assert_eq!(fine.sigma.to_bits(), mesh.sigma.to_bits());
        prop_assert_eq!(fine.l.to_bits(), mesh.l.to_bits());
        for (i, node) in mesh.nodes.iter().enumerate() {
            prop_assert_eq!(fine.nodes[2 * i].to_bits(), node.to_bits());
        }
    }

    /// Time grids keep `dt * delay_steps = tau` and halving doubles
    /// every count without moving the horizon.
    #[test]
    fn time_grids_halve_consistently(
        tau in prop::sample::select(vec![0.25f64, 0.5, 1.0, 2.0, 3.0]),
        k in 1usize..=4,
        m in 1usize..=64,
    ) {
        let grid = TimeGrid::new(tau, k as f64 * tau, m).unwrap();
        prop_assert_eq!(grid.delay_steps, m);
        prop_assert_eq!(grid.steps, k * m);
        prop_assert_eq!(grid.rows(), k * m + m + 1);
        prop_assert_eq!(grid.dt.to_bits(), (tau / m as f64).to_bits());
        prop_assert!((grid.time(m as i64) - tau).abs() <= 1e-12 * tau);
        prop_assert!((grid.time(-(m as i64)) + tau).abs() <= 1e-12 * tau);
        let fine = grid.halved();
        prop_assert_eq!(fine.delay_steps, 2 * m);
        prop_assert_eq!(fine.steps, 2 * k * m);
        prop_assert_eq!(fine.tau.to_bits(), grid.tau.to_bits());
        prop_assert_eq!(fine.horizon.to_bits(), grid.horizon.to_bits());
        prop_assert_eq!(fine.dt.to_bits(), (tau / (2 * m) as f64).to_bits());
    }

    /// `order` inverts a known error ratio.
    #[test]
    fn order_recovers_known_exponents(
        scale in 1e-8..1.0f64,
        q in -3.0..3.0f64,
    ) {
        let coarse = scale;
        let fine = scale * 2f64.powf(-q);
        let got = order(coarse, fine).unwrap();
        prop_assert!((got - q).abs() <= 1e-9, "got {got}, want {q}");
    }
}

#[test]
fn mesh_constructors_reject_bad_shapes() {
    assert!(SpatialMesh::shishkin(7, 0.01, 2.0, FactorChoice::LnN).is_err());
    assert!(SpatialMesh::shishkin(2, 0.01, 2.0, FactorChoice::LnN).is_err());
    assert!(SpatialMesh::shishkin(64, 0.01, 0.0, FactorChoice::LnN).is_err());
    assert!(SpatialMesh::shishkin(64, 0.01, 2.0, FactorChoice::Custom(1.5)).is_err());
    assert!(SpatialMesh::uniform(9).is_err());
    assert!(TimeGrid::new(1.0, 2.5, 4).is_err());
    assert!(TimeGrid::new(1.0, 2.0, 0).is_err());
}
