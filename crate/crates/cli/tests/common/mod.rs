use cgf_core::coeff::{Coefficient, GaussRational, Symbol};
use cgf_core::wick::{ModeOp, OperatorExpr};
use num_rational::BigRational;
use rand::Rng;

pub fn random_coefficient(rng: &mut impl Rng, symbols: bool) -> Coefficient {
    let re = BigRational::new(rng.gen_range(-4i64..=4).into(), rng.gen_range(1i64..=3).into());
    let im = BigRational::new(rng.gen_range(-2i64..=2).into(), rng.gen_range(1i64..=2).into());
    let mut c = Coefficient::constant(GaussRational::new(re, im));
    if !symbols {
        return c;
    }
    for sym in Symbol::ALL {
        if rng.gen_bool(0.25) {
            c = c * Coefficient::symbol_pow(sym, rng.gen_range(-2i32..=2));
        }
    }
    if rng.gen_bool(0.2) {
        c = &c + &Coefficient::symbol(Symbol::ALL[rng.gen_range(0..Symbol::ALL.len())]);
    }
    c
}

pub fn random_word(rng: &mut impl Rng) -> Vec<usize> {
    (0..rng.gen_range(0..5)).map(|_| rng.gen_range(0..8)).collect()
}

pub fn word_expr(word: &[usize]) -> OperatorExpr {
    word.iter()
        .fold(OperatorExpr::one(), |acc, &k| acc.multiply(&OperatorExpr::mode(ModeOp::ALL[k])))
}

pub fn random_expr(rng: &mut impl Rng, symbols: bool) -> OperatorExpr {
    let mut e = OperatorExpr::zero();
    for _ in 0..rng.gen_range(1..4) {
        let word = random_word(rng);
        e = &e + &word_expr(&word).scale(&random_coefficient(rng, symbols));
    }
    e
}
