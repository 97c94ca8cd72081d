//! Univariate polynomials and rational functions over `Rat`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::eval::factor_int;
use super::expr::Expr;
use super::normalize::normalize;
use super::quad::Quad;
use super::rat::Rat;

/// Sparse polynomial: degree → nonzero coefficient.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: BTreeMap<u32, Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RootError {
    #[error("no sign change: the polynomial has no positive real root")]
    NoSignChange,
    #[error("root enclosure width must be positive")]
    BadWidth,
}

/// An enclosure of a real root of `poly`: either `lo = hi` is an exact root,
/// or `poly(lo)` and `poly(hi)` have opposite signs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Rat,
    pub hi: Rat,
    pub poly: Poly,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: Rat) -> Poly {
        Poly::monomial(c, 0)
    }

    pub fn one() -> Poly {
        Poly::constant(Rat::one())
    }

    /// The polynomial `t`.
    pub fn x() -> Poly {
        Poly::monomial(Rat::one(), 1)
    }

    pub fn monomial(c: Rat, deg: u32) -> Poly {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(deg, c);
        }
        Poly { coeffs }
    }

    /// Coefficients in ascending degree order.
    pub fn from_coeffs(cs: impl IntoIterator<Item = Rat>) -> Poly {
        let coeffs = cs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as u32, c))
            .collect();
        Poly { coeffs }
    }

    pub fn from_ints(cs: &[i64]) -> Poly {
        Poly::from_coeffs(cs.iter().map(|&c| Rat::from(c)))
    }

    /// `t - r`.
    pub fn linear_root(r: &Rat) -> Poly {
        Poly::from_coeffs([-r, Rat::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn coeff(&self, d: u32) -> Rat {
        self.coeffs.get(&d).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rat)> {
        self.coeffs.iter().map(|(d, c)| (*d, c))
    }

    pub fn lead(&self) -> Rat {
        self.coeffs.values().next_back().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { coeffs: self.coeffs.iter().map(|(d, c)| (*d, c * k)).collect() }
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().recip())
    }

    pub fn eval(&self, t: &Rat) -> Rat {
        let mut acc = Rat::zero();
        let deg = self.degree();
        for d in (0..=deg).rev() {
            acc = acc * t + self.coeff(d);
        }
        acc
    }

    pub fn eval_quad(&self, t: &Quad) -> Quad {
        let mut acc = Quad::zero();
        for d in (0..=self.degree()).rev() {
            acc = &(&acc * t) + &Quad::rat(self.coeff(d));
        }
        acc
    }

    pub fn sign_at(&self, t: &Rat) -> i32 {
        self.eval(t).signum()
    }

    pub fn derivative(&self) -> Poly {
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(d, _)| **d > 0)
                .map(|(d, c)| (d - 1, c * &Rat::from(*d as i64)))
                .collect(),
        }
    }

    /// `p(t + a)`.
    pub fn shift(&self, a: &Rat) -> Poly {
        let mut acc = Poly::zero();
        let step = Poly::from_coeffs([a.clone(), Rat::one()]);
        for d in (0..=self.degree()).rev() {
            acc = &(&acc * &step) + &Poly::constant(self.coeff(d));
        }
        acc
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, other: &Poly) -> (Poly, Poly) {
        assert!(!other.is_zero(), "polynomial division by zero");
        let dd = other.degree();
        let lc = other.lead();
        let mut q = Poly::zero();
        let mut r = self.clone();
        while !r.is_zero() && r.degree() >= dd {
            let k = r.degree() - dd;
            let c = &r.lead() / &lc;
            let m = Poly::monomial(c, k);
            r = &r - &(&m * other);
            q = &q + &m;
        }
        (q, r)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn square_free(&self) -> Poly {
        if self.degree() == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    /// Scales to a primitive integer polynomial with positive leading coefficient.
    pub fn integer_primitive(&self) -> Vec<BigInt> {
        let lcm = self.coeffs.values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut ints: Vec<BigInt> = (0..=self.degree())
            .map(|d| (self.coeff(d) * Rat::from_int(lcm.clone())).to_bigint().unwrap())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if !g.is_zero() {
            for c in &mut ints {
                *c /= &g;
            }
        }
        if ints.last().is_some_and(|c| c.is_negative()) {
            for c in &mut ints {
                *c = -&*c;
            }
        }
        ints
    }

    /// Rational roots with multiplicity, ascending.
    pub fn rational_roots(&self) -> Vec<Rat> {
        let mut roots = Vec::new();
        if self.is_zero() {
            return roots;
        }
        let mut p = self.clone();
        let low = *p.coeffs.keys().next().unwrap();
        for _ in 0..low {
            roots.push(Rat::zero());
        }
        p = Poly { coeffs: p.coeffs.iter().map(|(d, c)| (d - low, c.clone())).collect() };
        if p.degree() > 0 {
            let ints = p.integer_primitive();
            let a0 = ints[0].abs();
            let an = ints.last().unwrap().abs();
            let mut cands = Vec::new();
            for num in divisors(&a0) {
                for den in divisors(&an) {
                    let r = Rat::new(num.clone(), den.clone());
                    cands.push(r.clone());
                    cands.push(-r);
                }
            }
            cands.sort();
            cands.dedup();
            for r in cands {
                while p.degree() > 0 && p.eval(&r).is_zero() {
                    p = p.div_rem(&Poly::linear_root(&r)).0;
                    roots.push(r.clone());
                }
            }
        }
        roots.sort();
        roots
    }

    /// Real roots of a quadratic as exact surds (ascending), when real.
    pub fn quadratic_roots(&self) -> Option<(Quad, Quad)> {
        if self.degree() != 2 {
            return None;
        }
        let (a, b, c) = (self.coeff(2), self.coeff(1), self.coeff(0));
        let disc = &b * &b - Rat::from(4) * &a * &c;
        let s = Quad::sqrt_rat(&disc)?;
        let two_a = Quad::rat(Rat::from(2) * &a);
        let mb = Quad::rat(-&b);
        let r1 = (&mb - &s).try_div(&two_a).ok()?;
        let r2 = (&mb + &s).try_div(&two_a).ok()?;
        match r1.try_cmp(&r2) {
            Some(std::cmp::Ordering::Greater) => Some((r2, r1)),
            _ => Some((r1, r2)),
        }
    }

    /// Resultant via the Sylvester determinant.
    pub fn resultant(&self, other: &Poly) -> Rat {
        if self.is_zero() || other.is_zero() {
            return Rat::zero();
        }
        let m = self.degree() as usize;
        let n = other.degree() as usize;
        if m == 0 && n == 0 {
            return Rat::one();
        }
        let size = m + n;
        let mut mat = vec![vec![Rat::zero(); size]; size];
        for i in 0..n {
            for d in 0..=m {
                mat[i][i + m - d] = self.coeff(d as u32);
            }
        }
        for i in 0..m {
            for d in 0..=n {
                mat[n + i][i + n - d] = other.coeff(d as u32);
            }
        }
        determinant(mat)
    }

    /// Lagrange interpolation through `(x_i, y_i)` with distinct `x_i`.
    pub fn interpolate(points: &[(Rat, Rat)]) -> Poly {
        let mut acc = Poly::zero();
        for (i, (xi, yi)) in points.iter().enumerate() {
            let mut basis = Poly::one();
            let mut denom = Rat::one();
            for (j, (xj, _)) in points.iter().enumerate() {
                if i != j {
                    basis = &basis * &Poly::linear_root(xj);
                    denom *= &(xi - xj);
                }
            }
            acc = &acc + &basis.scale(&(yi / &denom));
        }
        acc
    }

    /// Sturm sequence of the square-free part.
    fn sturm(&self) -> Vec<Poly> {
        let p = self.square_free();
        let mut seq = vec![p.clone(), p.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            seq.push(-&r);
        }
        seq.pop();
        seq
    }

    fn variations(seq: &[Poly], t: Option<&Rat>) -> usize {
        let signs: Vec<i32> = seq
            .iter()
            .map(|p| match t {
                Some(t) => p.sign_at(t),
                None => p.lead().signum(),
            })
            .filter(|s| *s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct real roots in `(t, ∞)`.
    pub fn count_roots_above(&self, t: &Rat) -> usize {
        let seq = self.sturm();
        Poly::variations(&seq, Some(t)) - Poly::variations(&seq, None)
    }

    /// Cauchy bound: every root has absolute value below it.
    pub fn cauchy_bound(&self) -> Rat {
        let lc = self.lead().abs();
        let max = (0..self.degree())
            .map(|d| self.coeff(d).abs() / &lc)
            .max()
            .unwrap_or_else(Rat::zero);
        Rat::one() + max
    }

    /// Encloses the largest positive real root in a grid cell
    /// `[(j-1)·width, j·width]`, or returns it exactly when it is a grid point
    /// or rational.
    pub fn isolate_positive_root(&self, width: &Rat) -> Result<RootInterval, RootError> {
        if !width.is_positive() {
            return Err(RootError::BadWidth);
        }
        if self.degree() == 0 {
            return Err(RootError::NoSignChange);
        }
        let sf = self.square_free();
        if let Some(r) = self.rational_roots().into_iter().filter(|r| r.is_positive()).max() {
            if sf.count_roots_above(&r) == 0 {
                return Ok(RootInterval { lo: r.clone(), hi: r, poly: sf });
            }
        }
        let seq = sf.sturm();
        let inf = Poly::variations(&seq, None);
        let above = |t: &Rat| Poly::variations(&seq, Some(t)) - inf;
        if above(&Rat::zero()) == 0 {
            return Err(RootError::NoSignChange);
        }
        // smallest j with no root above j*width
        let mut lo_j = BigInt::zero();
        let mut hi_j = (sf.cauchy_bound() / width).ceil() + 1;
        while &hi_j - &lo_j > BigInt::one() {
            let mid: BigInt = (&lo_j + &hi_j) / 2;
            if above(&(Rat::from_int(mid.clone()) * width)) == 0 {
                hi_j = mid;
            } else {
                lo_j = mid;
            }
        }
        let hi = Rat::from_int(hi_j) * width;
        if sf.eval(&hi).is_zero() {
            return Ok(RootInterval { lo: hi.clone(), hi, poly: sf });
        }
        let lo = &hi - width;
        Ok(RootInterval { lo, hi, poly: sf })
    }

    pub fn to_expr(&self, var: &str) -> Expr {
        let terms: Vec<Expr> = self
            .coeffs
            .iter()
            .map(|(d, c)| Expr::Mul(vec![Expr::Const(c.clone()), Expr::powi(Expr::sym(var), *d as i64)]))
            .collect();
        normalize(&Expr::Add(terms))
    }
}

impl RootInterval {
    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut ds = vec![BigInt::one()];
    for (p, e) in factor_int(n) {
        let mut next = Vec::with_capacity(ds.len() * (e as usize + 1));
        for d in &ds {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        ds = next;
        if ds.len() > 1 << 16 {
            break;
        }
    }
    ds
}

/// Determinant by fraction-exact Gaussian elimination.
pub fn determinant(mut m: Vec<Vec<Rat>>) -> Rat {
    let n = m.len();
    let mut det = Rat::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rat::zero();
        };
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &p;
            for c in col..n {
                let v = &m[col][c] * &f;
                m[r][c] -= &v;
            }
        }
    }
    det
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr("t"))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut coeffs = self.coeffs.clone();
        for (d, c) in &rhs.coeffs {
            *coeffs.entry(*d).or_insert_with(Rat::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Poly { coeffs }
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &-rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rat::one())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut coeffs: BTreeMap<u32, Rat> = BTreeMap::new();
        for (d1, c1) in &self.coeffs {
            for (d2, c2) in &rhs.coeffs {
                *coeffs.entry(d1 + d2).or_insert_with(Rat::zero) += &(c1 * c2);
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        Poly { coeffs }
    }
}

macro_rules! owned_poly_op {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
owned_poly_op!(Add, add);
owned_poly_op!(Sub, sub);
owned_poly_op!(Mul, mul);

/// A reduced quotient of polynomials with monic denominator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> RatFunc {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFunc { num, den: Poly::one() };
        }
        let g = num.gcd(&den);
        let num = num.div_rem(&g).0;
        let den = den.div_rem(&g).0;
        let lc = den.lead();
        RatFunc { num: num.scale(&lc.recip()), den: den.scale(&lc.recip()) }
    }

    pub fn poly(p: Poly) -> RatFunc {
        RatFunc { num: p, den: Poly::one() }
    }

    pub fn constant(c: Rat) -> RatFunc {
        RatFunc::poly(Poly::constant(c))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }

    pub fn eval(&self, t: &Rat) -> Option<Rat> {
        let d = self.den.eval(t);
        (!d.is_zero()).then(|| self.num.eval(t) / d)
    }

    pub fn shift(&self, a: &Rat) -> RatFunc {
        RatFunc { num: self.num.shift(a), den: self.den.shift(a) }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn div(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &other.den, &self.den * &other.num)
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        RatFunc::new(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
    }

    pub fn to_expr(&self, var: &str) -> Expr {
        normalize(&Expr::Mul(vec![
            self.num.to_expr(var),
            Expr::recip(self.den.to_expr(var)),
        ]))
    }
}

/// Extracts a polynomial in `var` from an expression, if it is one.
pub fn poly_from_expr(e: &Expr, var: &str) -> Option<Poly> {
    match e {
        Expr::Const(c) => Some(Poly::constant(c.clone())),
        Expr::Sym(s) if s == var => Some(Poly::x()),
        Expr::Add(ts) => ts
            .iter()
            .try_fold(Poly::zero(), |acc, t| Some(&acc + &poly_from_expr(t, var)?)),
        Expr::Mul(fs) => fs
            .iter()
            .try_fold(Poly::one(), |acc, f| Some(&acc * &poly_from_expr(f, var)?)),
        Expr::Pow(b, x) => {
            let k = x.as_rat()?.to_i64()?;
            if !(0..=64).contains(&k) {
                return None;
            }
            let base = poly_from_expr(b, var)?;
            let mut acc = Poly::one();
            for _ in 0..k {
                acc = &acc * &base;
            }
            Some(acc)
        }
        _ => None,
    }
}

/// Extracts a rational function in `var`, if the expression is one.
pub fn ratfunc_from_expr(e: &Expr, var: &str) -> Option<RatFunc> {
    match e {
        Expr::Add(ts) => ts
            .iter()
            .try_fold(RatFunc::constant(Rat::zero()), |acc, t| Some(acc.add(&ratfunc_from_expr(t, var)?))),
        Expr::Mul(fs) => fs
            .iter()
            .try_fold(RatFunc::constant(Rat::one()), |acc, f| Some(acc.mul(&ratfunc_from_expr(f, var)?))),
        Expr::Pow(b, x) => {
            let k = x.as_rat()?.to_i64()?;
            if k.abs() > 64 {
                return None;
            }
            let base = ratfunc_from_expr(b, var)?;
            if base.is_zero() && k < 0 {
                return None;
            }
            let mut acc = RatFunc::constant(Rat::one());
            for _ in 0..k.abs() {
                acc = acc.mul(&base);
            }
            Some(if k < 0 { RatFunc::constant(Rat::one()).div(&acc) } else { acc })
        }
        _ => poly_from_expr(e, var).map(RatFunc::poly),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roots_with_multiplicity() {
        assert_eq!(Poly::from_ints(&[6, -5, 1]).rational_roots(), vec![Rat::from(2), Rat::from(3)]);
        assert!(Poly::from_ints(&[-1, 0, -1, 1]).rational_roots().is_empty());
        assert_eq!(Poly::from_ints(&[1, -2, 1]).rational_roots(), vec![Rat::one(), Rat::one()]);
        assert_eq!(Poly::from_ints(&[-1, 2]).rational_roots(), vec![Rat::new(1, 2)]);
    }

    #[test]
    fn isolation_matches_bisection() {
        let p = Poly::from_ints(&[-1, 0, -1, 1]);
        let iv = p.isolate_positive_root(&Rat::new(1, 1000)).unwrap();
        assert_eq!((iv.lo.clone(), iv.hi.clone()), (Rat::new(1465, 1000), Rat::new(1466, 1000)));
        assert!(p.sign_at(&iv.lo) < 0 && p.sign_at(&iv.hi) > 0);

        let iv = Poly::from_ints(&[-2, 1]).isolate_positive_root(&Rat::new(1, 10)).unwrap();
        assert_eq!((iv.lo, iv.hi), (Rat::from(2), Rat::from(2)));

        let iv = Poly::from_ints(&[-2, 0, 1]).isolate_positive_root(&Rat::new(1, 100)).unwrap();
        assert!(iv.hi <= Rat::new(142, 100) && iv.lo >= Rat::new(141, 100));

        assert_eq!(
            Poly::from_ints(&[1, 0, 1]).isolate_positive_root(&Rat::new(1, 10)),
            Err(RootError::NoSignChange)
        );
    }

    #[test]
    fn resultant_detects_common_roots() {
        let a = Poly::from_ints(&[-2, 1]);
        let b = Poly::from_ints(&[6, -5, 1]);
        assert!(a.resultant(&b).is_zero());
        assert!(!Poly::from_ints(&[-7, 1]).resultant(&b).is_zero());
    }

    #[test]
    fn shift_and_interpolate() {
        let p = Poly::from_ints(&[0, 0, 1]);
        assert_eq!(p.shift(&Rat::one()), Poly::from_ints(&[1, 2, 1]));
        let pts: Vec<(Rat, Rat)> = (0..4).map(|i| (Rat::from(i), p.eval(&Rat::from(i)))).collect();
        assert_eq!(Poly::interpolate(&pts), p);
    }

    #[test]
    fn golden_quadratic() {
        let (lo, hi) = Poly::from_ints(&[-1, -1, 1]).quadratic_roots().unwrap();
        assert!(!lo.is_positive() && hi.is_positive());
        assert_eq!(hi.to_string(), "1/2 + 1/2*5^(1/2)");
    }
}
