//! Multivariate polynomial GCD over ℚ.
//!
//! Strategy: strip monomial content, drop variables that occur in only one
//! argument, bound the GCD degree in every variable by a modular image at a
//! random point, and run a subresultant PRS in the cheapest variable only
//! when the bounds leave no shortcut.

use super::poly::MPoly;
use super::var::Var;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Monic (graded-lex leading coefficient 1) greatest common divisor.
/// `gcd(0, 0) = 0`.
pub fn gcd(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return MPoly::one();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let gm = ma.gcd(&mb);
    let a1 = a.div_monomial(&ma).unwrap().primitive();
    let b1 = b.div_monomial(&mb).unwrap().primitive();
    gcd_core(&a1, &b1).mul_monomial(&gm).monic()
}

/// GCD of a list; stops early once a unit is reached.
pub fn gcd_many<'a>(polys: impl IntoIterator<Item = &'a MPoly>) -> MPoly {
    let mut g = MPoly::zero();
    for p in polys {
        g = gcd(&g, p);
        if g.is_one() {
            break;
        }
    }
    g
}

// Inputs are primitive with trivial monomial content; output is primitive up to scale.
fn gcd_core(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_constant() || b.is_constant() {
        return MPoly::one();
    }
    if a.monic() == b.monic() {
        return a.clone();
    }
    let va = a.vars();
    let vb = b.vars();
    let only_a: Vec<Var> = va.difference(&vb).copied().collect();
    let only_b: Vec<Var> = vb.difference(&va).copied().collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        let ca = content_wrt(a, &only_a);
        if ca.is_one() {
            return MPoly::one();
        }
        let cb = content_wrt(b, &only_b);
        return gcd(&ca, &cb);
    }
    let common: Vec<Var> = va.into_iter().collect();
    let bounds = modular_degree_bounds(a, b, &common);
    let zero_vars: Vec<Var> = common.iter().copied().filter(|v| bounds.get(v) == Some(&0)).collect();
    if zero_vars.len() == common.len() {
        return MPoly::one();
    }
    if !zero_vars.is_empty() {
        let ca = content_wrt(a, &zero_vars);
        if ca.is_one() {
            return MPoly::one();
        }
        let cb = content_wrt(b, &zero_vars);
        return gcd(&ca, &cb);
    }
    // Cheap divisibility shortcut when the bounds allow one argument to be the GCD.
    let fits = |p: &MPoly| common.iter().all(|v| bounds.get(v).is_none_or(|&d| d >= p.degree_in(*v)));
    let (small, big) = if a.nterms() <= b.nterms() { (a, b) } else { (b, a) };
    if fits(small) && big.div_exact(small).is_some() {
        return small.clone();
    }
    if fits(big) && small.div_exact(big).is_some() {
        return big.clone();
    }
    let v = *common
        .iter()
        .min_by_key(|&&v| (a.degree_in(v).max(b.degree_in(v)), a.degree_in(v) + b.degree_in(v)))
        .unwrap();
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let c = gcd(&ca, &cb);
    let h = subresultant_pp(&pa, &pb, v);
    &c * &h
}

/// GCD of the coefficients of `p` regarded as a polynomial in `vars`.
fn content_wrt(p: &MPoly, vars: &[Var]) -> MPoly {
    let set: BTreeSet<Var> = vars.iter().copied().collect();
    let mut groups: BTreeMap<super::poly::Monomial, MPoly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let key = super::poly::Monomial::from_pairs(m.pairs().filter(|(v, _)| set.contains(v)));
        let rest = super::poly::Monomial::from_pairs(m.pairs().filter(|(v, _)| !set.contains(v)));
        groups.entry(key).or_default().add_term(rest, c.clone());
    }
    // Sort by size so small coefficients are tried first.
    let mut cs: Vec<MPoly> = groups.into_values().collect();
    cs.sort_by_key(MPoly::nterms);
    gcd_many(cs.iter())
}

/// Content with respect to a single main variable.
pub fn content_in(p: &MPoly, v: Var) -> MPoly {
    let mut cs: Vec<MPoly> = p.coeffs_in(v).into_iter().filter(|c| !c.is_zero()).collect();
    cs.sort_by_key(MPoly::nterms);
    let g = gcd_many(cs.iter());
    if g.is_zero() {
        MPoly::one()
    } else {
        g
    }
}

fn lc_in(c: &[MPoly]) -> &MPoly {
    c.last().expect("nonzero polynomial")
}

fn trim(c: &mut Vec<MPoly>) {
    while c.len() > 1 && c.last().unwrap().is_zero() {
        c.pop();
    }
}

fn is_zero_vec(c: &[MPoly]) -> bool {
    c.iter().all(MPoly::is_zero)
}

/// Pseudo-remainder of `a` by `b` (coefficient vectors in the main variable).
fn prem(a: &[MPoly], b: &[MPoly]) -> Vec<MPoly> {
    let n = b.len() - 1;
    let lb = lc_in(b);
    let mut r: Vec<MPoly> = a.to_vec();
    trim(&mut r);
    let mut e = (a.len() as i64) - (n as i64);
    while !is_zero_vec(&r) && r.len() > n {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - n;
        let mut next: Vec<MPoly> = r.iter().map(|c| c * lb).collect();
        for (i, bc) in b.iter().enumerate() {
            next[i + shift] = &next[i + shift] - &(&lr * bc);
        }
        next.pop();
        trim(&mut next);
        r = next;
        e -= 1;
    }
    if e > 0 {
        let f = lb.pow(e as u32);
        r = r.iter().map(|c| c * &f).collect();
    }
    r
}

/// Primitive part (in `v`) of the GCD of two primitive polynomials, via subresultants.
fn subresultant_pp(a: &MPoly, b: &MPoly, v: Var) -> MPoly {
    let (mut f, mut g) = (a.coeffs_in(v), b.coeffs_in(v));
    if f.len() < g.len() {
        std::mem::swap(&mut f, &mut g);
    }
    let mut gg = MPoly::one();
    let mut h = MPoly::one();
    loop {
        let delta = (f.len() - g.len()) as u32;
        let r = prem(&f, &g);
        if is_zero_vec(&r) {
            break;
        }
        if r.len() == 1 {
            return MPoly::one();
        }
        let divisor = &gg * &h.pow(delta);
        f = g;
        g = r.iter().map(|c| c.div_exact(&divisor).expect("subresultant division is exact")).collect();
        gg = lc_in(&f).clone();
        h = if delta == 0 {
            h
        } else {
            gg.pow(delta).div_exact(&h.pow(delta - 1)).expect("subresultant division is exact")
        };
    }
    let res = MPoly::from_coeffs_in(v, &g);
    let c = content_in(&res, v);
    res.div_exact(&c).expect("content divides").primitive()
}

// ---- modular degree bounds ----

const PRIME: u64 = 0x1fff_ffff_ffff_ffff; // 2^61 - 1

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

fn inv(a: u64) -> u64 {
    powmod(a, PRIME - 2)
}

fn big_mod(n: &BigInt) -> u64 {
    let m = n.mod_floor(&BigInt::from(PRIME));
    m.to_u64().unwrap()
}

fn rat_mod(c: &super::rat::Rat) -> Option<u64> {
    let d = big_mod(c.denom());
    if d == 0 {
        return None;
    }
    Some(mulmod(big_mod(c.numer()), inv(d)))
}

/// Image of `p` in F_p[v] with the other variables specialized.
fn image(p: &MPoly, v: Var, point: &BTreeMap<Var, u64>) -> Option<Vec<u64>> {
    let mut out = vec![0u64; p.degree_in(v) as usize + 1];
    for (m, c) in p.terms() {
        let mut t = rat_mod(c)?;
        let mut e_v = 0;
        for (w, e) in m.pairs() {
            if w == v {
                e_v = e;
            } else {
                t = mulmod(t, powmod(point[&w], e as u64));
            }
        }
        let slot = &mut out[e_v as usize];
        *slot = (*slot + t) % PRIME;
    }
    Some(out)
}

fn deg(p: &[u64]) -> Option<usize> {
    p.iter().rposition(|&c| c != 0)
}

fn poly_rem(a: &[u64], b: &[u64]) -> Vec<u64> {
    let db = deg(b).unwrap();
    let inv_lb = inv(b[db]);
    let mut r = a.to_vec();
    while let Some(dr) = deg(&r) {
        if dr < db {
            break;
        }
        let q = mulmod(r[dr], inv_lb);
        for i in 0..=db {
            let s = mulmod(q, b[i]);
            r[dr - db + i] = (r[dr - db + i] + PRIME - s) % PRIME;
        }
    }
    r
}

fn gcd_degree_mod(a: &[u64], b: &[u64]) -> usize {
    let (mut f, mut g) = (a.to_vec(), b.to_vec());
    while deg(&g).is_some() {
        let r = poly_rem(&f, &g);
        f = g;
        g = r;
    }
    deg(&f).unwrap_or(0)
}

/// Upper bounds on the GCD degree per variable (exact zero is certain).
fn modular_degree_bounds(a: &MPoly, b: &MPoly, vars: &[Var]) -> BTreeMap<Var, u32> {
    let mut seed = 0u64;
    for (m, _) in a.terms().take(3).chain(b.terms().take(3)) {
        seed = seed.wrapping_mul(31).wrapping_add(m.degree() as u64 + 7);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (a.nterms() as u64) << 20 ^ b.nterms() as u64);
    let mut bounds = BTreeMap::new();
    for &v in vars {
        let (da, db) = (a.degree_in(v) as usize, b.degree_in(v) as usize);
        for _attempt in 0..4 {
            let point: BTreeMap<Var, u64> = vars.iter().map(|&w| (w, rng.gen_range(2..PRIME - 1))).collect();
            let (Some(ia), Some(ib)) = (image(a, v, &point), image(b, v, &point)) else { continue };
            if deg(&ia) != Some(da) || deg(&ib) != Some(db) {
                continue;
            }
            bounds.insert(v, gcd_degree_mod(&ia, &ib) as u32);
            break;
        }
    }
    bounds
}

/// Least common multiple, monic.
pub fn lcm(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_zero() || b.is_zero() {
        return MPoly::zero();
    }
    let g = gcd(a, b);
    (a * &b.div_exact(&g).unwrap()).monic()
}
