//! Factorization of univariate polynomials over ℚ.
//!
//! Square-free parts are factored modulo one prime large enough to bound the
//! coefficients of every integer factor (no Hensel lifting), using
//! Cantor–Zassenhaus, then recombined by trial division over ℤ.

use super::rat::Rat;
use super::upoly::UPoly;
use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Monic irreducible factors with multiplicities; the constant factor is dropped.
pub fn factor(f: &UPoly) -> Vec<(UPoly, u32)> {
    let mut out = Vec::new();
    for (g, m) in f.squarefree() {
        for h in factor_squarefree(&g) {
            out.push((h, m));
        }
    }
    out.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| a.0.coeffs().cmp(b.0.coeffs())));
    out
}

/// Irreducible factors of a square-free polynomial (monic over ℚ).
pub fn factor_squarefree(g: &UPoly) -> Vec<UPoly> {
    if g.degree() <= 1 {
        return if g.degree() == 1 { vec![g.monic()] } else { vec![] };
    }
    // Pull out x first so the trailing coefficient is nonzero.
    if g.coeff(0).is_zero() {
        let rest = g.div_exact(&UPoly::x()).expect("x divides");
        let mut v = factor_squarefree(&rest);
        v.push(UPoly::x());
        return v;
    }
    let f = g.primitive_integer();
    if f.len() == 3 {
        return factor_quadratic(&f);
    }
    let n = f.len() - 1;
    let lc = f[n].clone();
    let norm2: BigInt = f.iter().map(|c| c * c).sum();
    let bound = lc.abs() * (BigInt::one() << n) * (norm2.sqrt() + BigInt::one());
    let mut p = (bound * 2u32 + BigInt::one()).to_biguint().unwrap();
    if p.is_even() {
        p += 1u32;
    }
    let field = loop {
        if is_probable_prime(&p) {
            let field = Field { p: p.clone() };
            if !(&lc % BigInt::from_biguint(Sign::Plus, p.clone())).is_zero() {
                let fp = field.reduce_all(&f);
                let dfp = field.derivative(&fp);
                if field.gcd(&fp, &dfp).len() == 1 {
                    break field;
                }
            }
        }
        p += 2u32;
    };
    let fp = field.monic(&field.reduce_all(&f));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut modular = Vec::new();
    for (h, d) in field.ddf(&fp) {
        field.edf(&h, d, &mut rng, &mut modular);
    }
    recombine(&f, modular, &field)
}

fn factor_quadratic(f: &[BigInt]) -> Vec<UPoly> {
    let (c, b, a) = (&f[0], &f[1], &f[2]);
    let disc = b * b - BigInt::from(4) * a * c;
    let q = UPoly::new(f.iter().map(|k| Rat::from_integer(k.clone())).collect());
    if disc.is_negative() {
        return vec![q.monic()];
    }
    let s = disc.sqrt();
    if &s * &s != disc {
        return vec![q.monic()];
    }
    let two_a = BigInt::from(2) * a;
    let r1 = Rat::new(-b + &s, two_a.clone());
    let r2 = Rat::new(-b - &s, two_a);
    let mut v = vec![UPoly::new(vec![-r1, Rat::one()]), UPoly::new(vec![-r2, Rat::one()])];
    v.sort_by(|a, b| a.coeffs().cmp(b.coeffs()));
    v
}

fn recombine(f: &[BigInt], mut modular: Vec<Vec<BigUint>>, field: &Field) -> Vec<UPoly> {
    let to_upoly = |c: &[BigInt]| UPoly::new(c.iter().map(|k| Rat::from_integer(k.clone())).collect());
    let mut current = to_upoly(f);
    let mut out = Vec::new();
    let mut k = 1;
    while 2 * k <= modular.len() {
        let mut found = false;
        for subset in combinations(modular.len(), k) {
            let lc_int = current.primitive_integer().last().cloned().unwrap();
            let mut g = vec![field.reduce_int(&lc_int)];
            for &i in &subset {
                g = field.mul(&g, &modular[i]);
            }
            let cand = to_upoly(&field.symmetric(&g));
            let cand = UPoly::new(cand.primitive_integer().into_iter().map(Rat::from_integer).collect());
            if let Some(q) = current.div_exact(&cand) {
                out.push(cand.monic());
                current = q;
                for &i in subset.iter().rev() {
                    modular.remove(i);
                }
                found = true;
                break;
            }
        }
        if !found {
            k += 1;
        }
    }
    if current.degree() > 0 {
        out.push(current.monic());
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 && idx[0] == n - k {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn is_probable_prime(n: &BigUint) -> bool {
    let small = [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &s in &small {
        if *n == BigUint::from(s) {
            return true;
        }
        if (n % s).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut r = 0;
    while d.is_even() {
        d >>= 1;
        r += 1;
    }
    'witness: for &a in &small {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..r {
            x = x.modpow(&BigUint::from(2u32), n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Arithmetic in F_p[x]; polynomials are ascending coefficient vectors without trailing zeros.
struct Field {
    p: BigUint,
}

impl Field {
    fn reduce_int(&self, a: &BigInt) -> BigUint {
        a.mod_floor(&BigInt::from_biguint(Sign::Plus, self.p.clone())).to_biguint().unwrap()
    }

    fn reduce_all(&self, c: &[BigInt]) -> Vec<BigUint> {
        trim(c.iter().map(|a| self.reduce_int(a)).collect())
    }

    fn symmetric(&self, c: &[BigUint]) -> Vec<BigInt> {
        let half = &self.p >> 1;
        c.iter()
            .map(|a| {
                let a = BigInt::from_biguint(Sign::Plus, a.clone());
                if a.magnitude() > &half {
                    a - BigInt::from_biguint(Sign::Plus, self.p.clone())
                } else {
                    a
                }
            })
            .collect()
    }

    fn inv(&self, a: &BigUint) -> BigUint {
        a.modpow(&(&self.p - 2u32), &self.p)
    }

    fn sub(&self, a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
        let n = a.len().max(b.len());
        let zero = BigUint::zero();
        trim(
            (0..n)
                .map(|i| {
                    let x = a.get(i).unwrap_or(&zero);
                    let y = b.get(i).unwrap_or(&zero);
                    (x + &self.p - y) % &self.p
                })
                .collect(),
        )
    }

    fn mul(&self, a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut c = vec![BigUint::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        trim(c.into_iter().map(|v| v % &self.p).collect())
    }

    fn rem(&self, a: &[BigUint], m: &[BigUint]) -> Vec<BigUint> {
        self.div_rem(a, m).1
    }

    fn div_rem(&self, a: &[BigUint], m: &[BigUint]) -> (Vec<BigUint>, Vec<BigUint>) {
        let dm = m.len() - 1;
        let inv = self.inv(&m[dm]);
        let mut r = a.to_vec();
        if r.len() <= dm {
            return (Vec::new(), trim(r));
        }
        let mut q = vec![BigUint::zero(); r.len() - dm];
        for i in (0..q.len()).rev() {
            let c = (&r[i + dm] * &inv) % &self.p;
            if !c.is_zero() {
                for (j, mc) in m.iter().enumerate() {
                    let s = (&c * mc) % &self.p;
                    r[i + j] = (&r[i + j] + &self.p - s) % &self.p;
                }
            }
            q[i] = c;
        }
        r.truncate(dm);
        (trim(q), trim(r))
    }

    fn monic(&self, a: &[BigUint]) -> Vec<BigUint> {
        let inv = self.inv(a.last().unwrap());
        a.iter().map(|c| (c * &inv) % &self.p).collect()
    }

    fn gcd(&self, a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
        let (mut a, mut b) = (a.to_vec(), b.to_vec());
        while !b.is_empty() {
            let r = self.rem(&a, &b);
            a = b;
            b = r;
        }
        if a.is_empty() {
            a
        } else {
            self.monic(&a)
        }
    }

    fn derivative(&self, a: &[BigUint]) -> Vec<BigUint> {
        trim(a.iter().enumerate().skip(1).map(|(k, c)| (c * BigUint::from(k)) % &self.p).collect())
    }

    fn powmod(&self, base: &[BigUint], e: &BigUint, m: &[BigUint]) -> Vec<BigUint> {
        let mut result = vec![BigUint::one()];
        let mut b = self.rem(base, m);
        for i in 0..e.bits() {
            if e.bit(i) {
                result = self.rem(&self.mul(&result, &b), m);
            }
            b = self.rem(&self.mul(&b, &b), m);
        }
        result
    }

    /// Distinct-degree factorization of a monic square-free polynomial.
    fn ddf(&self, f: &[BigUint]) -> Vec<(Vec<BigUint>, usize)> {
        let x = vec![BigUint::zero(), BigUint::one()];
        let mut out = Vec::new();
        let mut f = f.to_vec();
        let mut h = x.clone();
        let mut d = 1;
        while f.len() > 2 * d {
            h = self.powmod(&h, &self.p, &f);
            let g = self.gcd(&self.sub(&h, &x), &f);
            if g.len() > 1 {
                f = self.div_rem(&f, &g).0;
                h = self.rem(&h, &f);
                out.push((g, d));
            }
            d += 1;
        }
        if f.len() > 1 {
            let deg = f.len() - 1;
            out.push((f, deg));
        }
        out
    }

    /// Equal-degree splitting into monic irreducible factors of degree `d`.
    fn edf(&self, f: &[BigUint], d: usize, rng: &mut ChaCha8Rng, out: &mut Vec<Vec<BigUint>>) {
        let n = f.len() - 1;
        if n == d {
            out.push(f.to_vec());
            return;
        }
        let e = (self.p.pow(d as u32) - 1u32) >> 1;
        loop {
            let a: Vec<BigUint> = trim((0..n).map(|_| rng.gen_biguint_below(&self.p)).collect());
            if a.len() < 2 {
                continue;
            }
            let b = self.sub(&self.powmod(&a, &e, f), &[BigUint::one()]);
            let g = self.gcd(&b, f);
            if g.len() > 1 && g.len() < f.len() {
                let q = self.monic(&self.div_rem(f, &g).0);
                self.edf(&g, d, rng, out);
                self.edf(&q, d, rng, out);
                return;
            }
        }
    }
}

fn trim(mut v: Vec<BigUint>) -> Vec<BigUint> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prod(fs: &[(UPoly, u32)]) -> UPoly {
        fs.iter().fold(UPoly::one(), |acc, (f, m)| &acc * &f.pow(*m))
    }

    #[test]
    fn factors_small_products() {
        // (x^2+1)(x^3-1)(2x+3)
        let f = &(&UPoly::from_ints(&[1, 0, 1]) * &UPoly::from_ints(&[-1, 0, 0, 1])) * &UPoly::from_ints(&[3, 2]);
        let fs = factor(&f);
        assert_eq!(fs.len(), 4);
        assert_eq!(prod(&fs), f.monic());
        assert!(fs.iter().any(|(g, _)| *g == UPoly::from_ints(&[1, 1, 1])));
    }

    #[test]
    fn irreducible_stays_whole() {
        let f = UPoly::from_ints(&[1, 1, 0, 0, 1]); // x^4+x+1
        assert_eq!(factor(&f), vec![(f.clone(), 1)]);
        let g = UPoly::from_ints(&[-2, 0, 1]);
        assert_eq!(factor(&g), vec![(g.clone(), 1)]);
    }

    #[test]
    fn swinnerton_dyer_like() {
        // x^4 - 10x^2 + 1 is irreducible but splits mod every prime.
        let f = UPoly::from_ints(&[1, 0, -10, 0, 1]);
        assert_eq!(factor(&f), vec![(f.clone(), 1)]);
    }

    #[test]
    fn multiplicities() {
        let f = &UPoly::from_ints(&[1, 1]).pow(3) * &UPoly::from_ints(&[0, 1]).pow(2);
        let fs = factor(&f);
        assert_eq!(fs, vec![(UPoly::from_ints(&[0, 1]), 2), (UPoly::from_ints(&[1, 1]), 3)]);
    }
}
