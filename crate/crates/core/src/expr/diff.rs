//! Exact time derivative. Operator leaves are time independent, so only the
//! scalar layer contributes; factor order is kept so the result stays valid
//! for non-commuting operands.

use super::ast::{Expr, Func};

pub fn differentiate_t(e: &Expr) -> Expr {
    raw(e).prune()
}

fn raw(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Param(_) | Expr::Hbar | Expr::Op(_) => Expr::int(0),
        Expr::Time => Expr::int(1),
        Expr::Sum(ts) => Expr::Sum(ts.iter().map(raw).collect()),
        Expr::Product(fs) => {
            let terms = (0..fs.len())
                .map(|k| {
                    let mut factors = fs.clone();
                    factors[k] = raw(&fs[k]);
                    Expr::Product(factors)
                })
                .collect();
            Expr::Sum(terms)
        }
        Expr::Pow(b, n) => {
            let n = *n;
            if n == 0 {
                return Expr::int(0);
            }
            let db = raw(b);
            if b.is_scalar() {
                // n * b^(n-1) * b'
                Expr::Product(vec![Expr::int(n as i64), b.as_ref().clone().pow(n - 1), db])
            } else {
                // sum_k b^k b' b^(n-1-k); operator powers are never negative
                let terms = (0..n)
                    .map(|k| {
                        Expr::Product(vec![
                            b.as_ref().clone().pow(k),
                            db.clone(),
                            b.as_ref().clone().pow(n - 1 - k),
                        ])
                    })
                    .collect();
                Expr::Sum(terms)
            }
        }
        Expr::Div(a, b) => {
            // a'/b - a*b'/b^2
            let first = raw(a).div(b.as_ref().clone());
            let second = Expr::Product(vec![Expr::int(-1), a.as_ref().clone(), raw(b)])
                .div(b.as_ref().clone().pow(2));
            Expr::Sum(vec![first, second])
        }
        Expr::Func(f, u) => {
            let du = raw(u);
            let outer = match f {
                Func::Sin => Expr::func(Func::Cos, u.as_ref().clone()),
                Func::Cos => Expr::Product(vec![Expr::int(-1), Expr::func(Func::Sin, u.as_ref().clone())]),
                Func::Exp => Expr::func(Func::Exp, u.as_ref().clone()),
            };
            Expr::Product(vec![outer, du])
        }
    }
}
