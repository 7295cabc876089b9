use std::collections::{BTreeMap, HashMap};

use qnoether::expr::{Expr, Func, OpLeaf};
use qnoether::gauss::GaussRat;
use qnoether::weyl::{OperatorPoly, ScalarPoly};
use rand::{Rng, RngCore};

/// Normal order of a word in x (false) and p (true) by repeated `p x -> x p - i hbar`.
///
/// The value at `(a, b)` is an integer `n` standing for `n (-i hbar)^k x^a p^b`,
/// where `k` is the number of contracted pairs.
pub struct SwapRewriter {
    memo: HashMap<Vec<bool>, BTreeMap<(u32, u32), i64>>,
}

impl SwapRewriter {
    pub fn new() -> Self {
        Self { memo: HashMap::new() }
    }

    fn normal(&mut self, word: &[bool]) -> BTreeMap<(u32, u32), i64> {
        if let Some(hit) = self.memo.get(word) {
            return hit.clone();
        }
        let out = match word.windows(2).position(|w| w[0] && !w[1]) {
            None => {
                let a = word.iter().filter(|&&c| !c).count() as u32;
                BTreeMap::from([((a, word.len() as u32 - a), 1)])
            }
            Some(i) => {
                let mut swapped = word.to_vec();
                swapped.swap(i, i + 1);
                let mut contracted = word.to_vec();
                contracted.drain(i..i + 2);
                let mut acc = self.normal(&swapped);
                for (k, v) in self.normal(&contracted) {
                    *acc.entry(k).or_insert(0) += v;
                }
                acc.retain(|_, v| *v != 0);
                acc
            }
        };
        self.memo.insert(word.to_vec(), out.clone());
        out
    }

    pub fn normal_order(&mut self, word: &[bool]) -> OperatorPoly {
        let len = word.len() as u32;
        let mut acc = OperatorPoly::zero();
        for ((a, b), n) in self.normal(word) {
            let k = (len - a - b) / 2;
            let sign = if k.is_multiple_of(2) { n } else { -n };
            let coeff = ScalarPoly::i_hbar().pow(k).scale(&GaussRat::from_int(sign));
            acc = &acc + &OperatorPoly::monomial(coeff, a, b);
        }
        acc
    }
}

pub fn word(a: u32, b: u32) -> Vec<bool> {
    std::iter::repeat_n(false, a as usize).chain(std::iter::repeat_n(true, b as usize)).collect()
}

pub const FUZZ_PARAMS: &[&str] = &["m", "e", "E", "omega"];

fn scalar_leaf(rng: &mut dyn RngCore) -> Expr {
    match rng.random_range(0..4) {
        0 => {
            let re = GaussRat::ratio(rng.random_range(-6..7), rng.random_range(1..5));
            let im = GaussRat::from_int(rng.random_range(-3..4));
            Expr::Const(&re + &(&im * &GaussRat::i()))
        }
        1 => Expr::param(FUZZ_PARAMS[rng.random_range(0..FUZZ_PARAMS.len())]),
        2 => Expr::Time,
        _ => Expr::Hbar,
    }
}

fn children(rng: &mut dyn RngCore, depth: u32, gen: fn(&mut dyn RngCore, u32) -> Expr) -> Vec<Expr> {
    let n = rng.random_range(2..4);
    (0..n).map(|_| gen(rng, depth - 1)).collect()
}

pub fn scalar_expr(rng: &mut dyn RngCore, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.3) {
        return scalar_leaf(rng);
    }
    match rng.random_range(0..4) {
        0 => Expr::Sum(children(rng, depth, scalar_expr)),
        1 => Expr::Product(children(rng, depth, scalar_expr)),
        2 => scalar_expr(rng, depth - 1).pow(rng.random_range(-2..4)),
        _ => {
            let f = [Func::Sin, Func::Cos, Func::Exp][rng.random_range(0..3)];
            Expr::func(f, scalar_expr(rng, depth - 1))
        }
    }
}

pub fn operator_expr(rng: &mut dyn RngCore, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        if rng.random_bool(0.5) {
            let leaf = [OpLeaf::X, OpLeaf::P, OpLeaf::Sx, OpLeaf::Sy, OpLeaf::Sz][rng.random_range(0..5)];
            return Expr::op(leaf);
        }
        return scalar_leaf(rng);
    }
    match rng.random_range(0..5) {
        0 => Expr::Sum(children(rng, depth, operator_expr)),
        1 => Expr::Product(children(rng, depth, operator_expr)),
        2 => operator_expr(rng, depth - 1).pow(rng.random_range(0..3)),
        3 => operator_expr(rng, depth - 1).div(scalar_expr(rng, 2)),
        _ => scalar_expr(rng, depth - 1),
    }
}
