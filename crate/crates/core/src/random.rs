//! Seeded generators of small random algebraic objects, shared by the property
//! suites and the command line.

use crate::algebra::{MPoly, Monomial, Rat, RatFunc, UPoly, Var};
use crate::conjugation::{BirMap1H, LinMap};
use crate::flowcore::VectorField;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Numerator in −5..=5, denominator in 1..=3.
pub fn small_rat(rng: &mut ChaCha8Rng) -> Rat {
    Rat::new(rng.gen_range(-5i64..=5).into(), rng.gen_range(1i64..=3).into())
}

pub fn nonzero_rat(rng: &mut ChaCha8Rng) -> Rat {
    loop {
        let r = small_rat(rng);
        if !r.is_zero() {
            return r;
        }
    }
}

fn monomials(vars: &[Var], deg: u32) -> Vec<Monomial> {
    match vars {
        [] => vec![Monomial::one()],
        [v] => vec![Monomial::var_pow(*v, deg)],
        [v, rest @ ..] => (0..=deg)
            .flat_map(|e| monomials(rest, deg - e).into_iter().map(move |m| m.mul(&Monomial::var_pow(*v, e))))
            .collect(),
    }
}

/// Nonzero homogeneous polynomial of the given degree with at most `max_terms` terms.
pub fn homogeneous_poly(rng: &mut ChaCha8Rng, vars: &[Var], deg: u32, max_terms: usize) -> MPoly {
    let all = monomials(vars, deg);
    loop {
        let mut p = MPoly::zero();
        for _ in 0..rng.gen_range(1..=max_terms.max(1)) {
            let m = all[rng.gen_range(0..all.len())].clone();
            p.add_term(m, nonzero_rat(rng));
        }
        if !p.is_zero() {
            return p;
        }
    }
}

/// Nonzero univariate polynomial in x of degree ≤ `deg`.
pub fn upoly(rng: &mut ChaCha8Rng, deg: u32) -> UPoly {
    loop {
        let p = UPoly::new((0..=deg).map(|_| small_rat(rng)).collect());
        if !p.is_zero() {
            return p;
        }
    }
}

/// Univariate rational function in x with numerator and denominator degree ≤ `deg`.
pub fn univariate_ratfunc(rng: &mut ChaCha8Rng, deg: u32) -> RatFunc {
    let n = upoly(rng, deg).to_mpoly(Var::X);
    let d = upoly(rng, deg).to_mpoly(Var::X);
    RatFunc::new(n, d).expect("nonzero denominator")
}

/// Planar field P₁/Q • P₂/Q with deg Pᵢ = d + 2 ≤ max_deg, deg Q = d.
pub fn field(rng: &mut ChaCha8Rng, max_deg: u32) -> VectorField {
    let xy = [Var::X, Var::Y];
    let d = rng.gen_range(0..=max_deg.saturating_sub(2));
    let q = homogeneous_poly(rng, &xy, d, 2);
    let comps = (0..2)
        .map(|_| RatFunc::new(homogeneous_poly(rng, &xy, d + 2, 3), q.clone()).expect("nonzero"))
        .collect();
    VectorField::new(xy.to_vec(), comps).expect("2-homogeneous by construction")
}

/// ℓ_{P,Q} with P, Q homogeneous of a common degree in 1..=max_deg.
pub fn bir(rng: &mut ChaCha8Rng, max_deg: u32) -> BirMap1H {
    let xy = [Var::X, Var::Y];
    let d = rng.gen_range(1..=max_deg.max(1));
    BirMap1H::new(&homogeneous_poly(rng, &xy, d, 3), &homogeneous_poly(rng, &xy, d, 3)).expect("equal degrees")
}

/// 0-homogeneous ratio of two random forms of degree ≤ max_deg.
pub fn ratio0(rng: &mut ChaCha8Rng, vars: &[Var], max_deg: u32) -> RatFunc {
    let d = rng.gen_range(0..=max_deg);
    RatFunc::new(homogeneous_poly(rng, vars, d, 3), homogeneous_poly(rng, vars, d, 3)).expect("nonzero")
}

/// 1-homogeneous J = P/Q with deg P = deg Q + 1.
pub fn one_homogeneous(rng: &mut ChaCha8Rng, vars: &[Var], max_deg: u32) -> RatFunc {
    let d = rng.gen_range(0..=max_deg.saturating_sub(1));
    RatFunc::new(homogeneous_poly(rng, vars, d + 1, 3), homogeneous_poly(rng, vars, d, 2)).expect("nonzero")
}

pub fn linmap(rng: &mut ChaCha8Rng, n: usize) -> LinMap {
    loop {
        let m = (0..n).map(|_| (0..n).map(|_| small_rat(rng)).collect()).collect();
        if let Ok(l) = LinMap::new(m) {
            return l;
        }
    }
}

/// Integer matrix with determinant ±1, built from elementary shears and a swap.
pub fn unimodular(rng: &mut ChaCha8Rng) -> LinMap {
    let mut m = LinMap::identity(2);
    for _ in 0..rng.gen_range(1..=4) {
        let k: i64 = rng.gen_range(-3..=3);
        let k = Rat::from_integer(k.into());
        let shear = if rng.gen_bool(0.5) {
            vec![vec![Rat::from_integer(1.into()), k], vec![Rat::zero(), Rat::from_integer(1.into())]]
        } else {
            vec![vec![Rat::from_integer(1.into()), Rat::zero()], vec![k, Rat::from_integer(1.into())]]
        };
        m = m.compose(&LinMap::new(shear).expect("shear"));
    }
    if rng.gen_bool(0.5) {
        m = m.compose(&LinMap::swap());
    }
    m
}
