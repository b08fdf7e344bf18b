//! Renders the Bernoulli numbers B_0 ..= B_60 from exact rationals into a
//! generated table of `f64` constants.

use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

const MAX_INDEX: usize = 60;

fn main() {
    // Akiyama–Tanigawa, which yields B_1 = +1/2; only even indices are used.
    let mut row: Vec<BigRational> = Vec::with_capacity(MAX_INDEX + 1);
    let mut bernoulli = Vec::with_capacity(MAX_INDEX + 1);
    for m in 0..=MAX_INDEX {
        row.push(BigRational::new(BigInt::from(1), BigInt::from(m as u64 + 1)));
        for j in (1..=m).rev() {
            let diff = &row[j - 1] - &row[j];
            row[j - 1] = diff * BigRational::from_integer(BigInt::from(j as u64));
        }
        bernoulli.push(row[0].clone());
    }

    let mut out = String::new();
    writeln!(out, "/// Bernoulli numbers B_0 ..= B_{MAX_INDEX} (B_1 = +1/2).").unwrap();
    writeln!(out, "pub const BERNOULLI: [f64; {}] = [", MAX_INDEX + 1).unwrap();
    for b in &bernoulli {
        let value = if b.is_zero() { 0.0 } else { rational_to_f64(b) };
        writeln!(out, "    {value:e},").unwrap();
    }
    writeln!(out, "];").unwrap();

    let dest = Path::new(&env::var("OUT_DIR").unwrap()).join("bernoulli_table.rs");
    fs::write(dest, out).unwrap();
    println!("cargo:rerun-if-changed=build.rs");
}

fn rational_to_f64(r: &BigRational) -> f64 {
    // Scale so both parts fit comfortably before dividing.
    let num = r.numer();
    let den = r.denom();
    let shift = num.bits().max(den.bits()).saturating_sub(900) as usize;
    let n = (num >> shift).to_f64().unwrap();
    let d = (den >> shift).to_f64().unwrap();
    n / d
}
