//! Exact rational re-derivation of the scores from raw counts.
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

fn q(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn div(a: BigRational, b: BigRational) -> BigRational {
    if b.is_zero() {
        BigRational::zero()
    } else {
        a / b
    }
}

/// Precision, recall and F1 of class `c`; F1 taken as `2TP / (row + col)`.
pub fn prf(counts: &[Vec<u64>], c: usize) -> (f64, f64, f64) {
    let tp = counts[c][c];
    let row: u64 = counts[c].iter().sum();
    let col: u64 = counts.iter().map(|r| r[c]).sum();
    let p = div(q(tp), q(col));
    let r = div(q(tp), q(row));
    let f1 = div(q(2 * tp), q(row + col));
    (p.to_f64().unwrap(), r.to_f64().unwrap(), f1.to_f64().unwrap())
}

pub fn macro_f1(counts: &[Vec<u64>], classes: &[usize]) -> f64 {
    let sum = classes.iter().fold(BigRational::zero(), |acc, &c| {
        let tp = counts[c][c];
        let row: u64 = counts[c].iter().sum();
        let col: u64 = counts.iter().map(|r| r[c]).sum();
        acc + div(q(2 * tp), q(row + col))
    });
    (sum / q(classes.len() as u64)).to_f64().unwrap()
}

/// FNC score of a matrix in `[Agree, Disagree, Neutral, Unrelated]` order.
pub fn fnc(counts: &[Vec<u64>]) -> f64 {
    const UNRELATED: usize = 3;
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    let three_quarters = BigRational::new(BigInt::from(3), BigInt::from(4));
    let mut achieved = BigRational::zero();
    let mut maximum = BigRational::zero();
    for (g, row) in counts.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            let n = q(n);
            let split_ok = (g == UNRELATED) == (p == UNRELATED);
            if split_ok {
                achieved += &quarter * &n;
            }
            if g != UNRELATED && g == p {
                achieved += &three_quarters * &n;
            }
            maximum += if g == UNRELATED { &quarter * &n } else { n };
        }
    }
    (achieved / maximum).to_f64().unwrap()
}
