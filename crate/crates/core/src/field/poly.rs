//! Exact polynomials, polynomial vector fields and 1-forms over ℚ.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Q = BigRational;

/// Exact rational from a finite float (every finite f64 is dyadic).
pub fn q_from_f64(x: f64) -> Q {
    BigRational::from_float(x).expect("finite float")
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parse `p/q`, an integer, or a decimal with optional exponent, exactly.
pub fn parse_rational(tok: &str) -> Option<Q> {
    if let Some((p, q)) = tok.split_once('/') {
        let p: BigInt = p.parse().ok()?;
        let q: BigInt = q.parse().ok()?;
        return (!q.is_zero()).then(|| Q::new(p, q));
    }
    let (mant, exp) = match tok.find(['e', 'E']) {
        Some(i) => (&tok[..i], tok[i + 1..].parse::<i32>().ok()?),
        None => (tok, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut v = if shift >= 0 {
        Q::from_integer(digits * num_traits::pow(ten, shift as usize))
    } else {
        Q::new(digits, num_traits::pow(ten, (-shift) as usize))
    };
    if neg {
        v = -v;
    }
    Some(v)
}

/// Sparse polynomial in `nvars` variables with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    pub fn monomial(exps: Vec<u32>, c: Q) -> Self {
        let nvars = exps.len();
        let mut p = Self::zero(nvars);
        p.add_term(exps, c);
        p
    }

    /// Add `c · x^exps` in place.
    pub fn add_term(&mut self, exps: Vec<u32>, c: Q) {
        assert_eq!(exps.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// The constant value if the polynomial has degree ≤ 0.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().expect("one term");
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * q_int(e[i] as i64));
            }
        }
        out
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        assert_eq!(x.len(), self.nvars);
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| q_to_f64(c) * x.iter().zip(e).map(|(xi, &k)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Q::one())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else if n > 0 { "+" } else { "" };
            let sep = if n > 0 { " " } else { "" };
            write!(f, "{sep}{sign}{sep}{}", c.abs())?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{k}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}

/// `Σ_i comps[i] ∂_i` on ℝ^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyVectorField {
    comps: Vec<Poly>,
}

impl PolyVectorField {
    pub fn new(comps: Vec<Poly>) -> Result<Self> {
        let d = comps.len();
        if comps.iter().any(|p| p.nvars() != d) {
            return Err(Error::Input("vector field components must be polynomials in d variables".into()));
        }
        Ok(Self { comps })
    }

    pub fn zero(d: usize) -> Self {
        Self { comps: vec![Poly::zero(d); d] }
    }

    /// `∂_i`.
    pub fn coordinate(d: usize, i: usize) -> Self {
        let mut v = Self::zero(d);
        v.comps[i] = Poly::constant(d, Q::one());
        v
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    pub fn component_mut(&mut self, i: usize) -> &mut Poly {
        &mut self.comps[i]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    /// Directional derivative `X(f) = Σ X^i ∂_i f`.
    pub fn apply(&self, f: &Poly) -> Poly {
        self.comps.iter().enumerate().fold(Poly::zero(self.dim()), |acc, (i, xi)| &acc + &(xi * &f.derivative(i)))
    }

    pub fn eval(&self, x: &[Q]) -> Vec<Q> {
        self.comps.iter().map(|p| p.eval(x)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self { comps: self.comps.iter().map(|p| p.scale(c)).collect() }
    }
}

/// Exact Lie bracket `[X, Y]^i = X(Y^i) - Y(X^i)`.
pub fn poly_bracket(x: &PolyVectorField, y: &PolyVectorField) -> Result<PolyVectorField> {
    if x.dim() != y.dim() {
        return Err(Error::Dimension { expected: x.dim(), got: y.dim() });
    }
    Ok(PolyVectorField {
        comps: x.comps.iter().zip(&y.comps).map(|(xi, yi)| &x.apply(yi) - &y.apply(xi)).collect(),
    })
}

/// `Σ_i comps[i] dx_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyCovector {
    comps: Vec<Poly>,
}

impl PolyCovector {
    pub fn new(comps: Vec<Poly>) -> Result<Self> {
        let d = comps.len();
        if comps.iter().any(|p| p.nvars() != d) {
            return Err(Error::Input("covector components must be polynomials in d variables".into()));
        }
        Ok(Self { comps })
    }

    pub fn components(&self) -> &[Poly] {
        &self.comps
    }

    /// `θ(X)`.
    pub fn pair(&self, x: &PolyVectorField) -> Poly {
        self.comps.iter().zip(x.components()).fold(Poly::zero(self.comps.len()), |acc, (a, b)| &acc + &(a * b))
    }

    /// `dθ(X, Y) = Σ_{ij} (∂_i θ_j - ∂_j θ_i) X^i Y^j`, computed from the
    /// coordinate formula (no brackets involved).
    pub fn d_pair(&self, x: &PolyVectorField, y: &PolyVectorField) -> Poly {
        let d = self.comps.len();
        let mut acc = Poly::zero(d);
        for i in 0..d {
            for j in 0..d {
                let c = &self.comps[j].derivative(i) - &self.comps[i].derivative(j);
                if c.is_zero() {
                    continue;
                }
                acc = &acc + &(&(&c * &x.components()[i]) * &y.components()[j]);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn heis() -> (PolyVectorField, PolyVectorField) {
        // X = ∂x - (y/2)∂z, Y = ∂y + (x/2)∂z
        let mut x = PolyVectorField::coordinate(3, 0);
        *x.component_mut(2) = Poly::var(3, 1).scale(&q(-1, 2));
        let mut y = PolyVectorField::coordinate(3, 1);
        *y.component_mut(2) = Poly::var(3, 0).scale(&q(1, 2));
        (x, y)
    }

    #[test]
    fn heisenberg_bracket() {
        let (x, y) = heis();
        assert_eq!(poly_bracket(&x, &y).unwrap(), PolyVectorField::coordinate(3, 2));
        assert!(poly_bracket(&x, &x).unwrap().is_zero());
        let c1 = PolyVectorField::coordinate(3, 0).scale(&q(3, 1));
        let c2 = PolyVectorField::coordinate(3, 2);
        assert!(poly_bracket(&c1, &c2).unwrap().is_zero());
        assert!(poly_bracket(&x, &PolyVectorField::coordinate(2, 0)).is_err());
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("1/3"), Some(q(1, 3)));
        assert_eq!(parse_rational("-0.25"), Some(q(-1, 4)));
        assert_eq!(parse_rational("2.5e-1"), Some(q(1, 4)));
        assert_eq!(parse_rational("3"), Some(q(3, 1)));
        assert_eq!(parse_rational("1E2"), Some(q(100, 1)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        for bad in ["", "x", "1/0", "1.2.3", "--1", "e5", "1e"] {
            assert_eq!(parse_rational(bad), None, "{bad}");
        }
    }

    #[test]
    fn float_round_trip() {
        for x in [0.1, -3.75, 1e-300, 12345.678] {
            assert_eq!(q_to_f64(&q_from_f64(x)), x);
        }
    }

    #[test]
    fn derivative_and_eval() {
        // p = 3 x1^2 x2 - x2 + 1/2
        let mut p = Poly::zero(2);
        p.add_term(vec![2, 1], q(3, 1));
        p.add_term(vec![0, 1], q(-1, 1));
        p.add_term(vec![0, 0], q(1, 2));
        assert_eq!(p.derivative(0), Poly::monomial(vec![1, 1], q(6, 1)));
        assert_eq!(p.eval(&[q(1, 2), q(2, 1)]), q(3 * 2, 4) - q(2, 1) + q(1, 2));
        assert!((p.eval_f64(&[0.5, 2.0]) - 0.0).abs() < 1e-15);
        assert_eq!(p.degree(), Some(3));
        assert_eq!(p.to_string(), "1/2 - 1*x2 + 3*x1^2*x2");
        p.add_term(vec![2, 1], q(-3, 1));
        assert_eq!(p.terms().count(), 2);
    }

    #[test]
    fn dtheta_identity_heisenberg() {
        let (x, y) = heis();
        // θ = dz + (y/2)dx - (x/2)dy annihilates X and Y
        let th = PolyCovector::new(vec![
            Poly::var(3, 1).scale(&q(1, 2)),
            Poly::var(3, 0).scale(&q(-1, 2)),
            Poly::constant(3, q(1, 1)),
        ])
        .unwrap();
        assert!(th.pair(&x).is_zero() && th.pair(&y).is_zero());
        let br = poly_bracket(&x, &y).unwrap();
        assert_eq!(th.d_pair(&x, &y), -&th.pair(&br));
        assert_eq!(th.d_pair(&x, &y), Poly::constant(3, q(-1, 1)));
    }

    fn arb_poly(d: usize) -> impl Strategy<Value = Poly> {
        prop::collection::vec((prop::collection::vec(0u32..=2, d), -4i64..=4, 1i64..=3), 0..4).prop_map(
            move |ts| {
                let mut p = Poly::zero(d);
                for (e, n, den) in ts {
                    if e.iter().sum::<u32>() <= 2 {
                        p.add_term(e, q(n, den));
                    }
                }
                p
            },
        )
    }

    fn arb_field(d: usize) -> impl Strategy<Value = PolyVectorField> {
        prop::collection::vec(arb_poly(d), d).prop_map(|c| PolyVectorField::new(c).unwrap())
    }

    fn arb_triple() -> impl Strategy<Value = (PolyVectorField, PolyVectorField, PolyVectorField)> {
        (1usize..=7).prop_flat_map(|d| (arb_field(d), arb_field(d), arb_field(d)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn bracket_antisymmetry_and_jacobi((x, y, z) in arb_triple()) {
            let xy = poly_bracket(&x, &y).unwrap();
            let yx = poly_bracket(&y, &x).unwrap();
            prop_assert!(xy.add(&yx).is_zero());
            let j = poly_bracket(&x, &poly_bracket(&y, &z).unwrap()).unwrap()
                .add(&poly_bracket(&y, &poly_bracket(&z, &x).unwrap()).unwrap())
                .add(&poly_bracket(&z, &xy).unwrap());
            prop_assert!(j.is_zero());
        }

        #[test]
        fn cartan_formula((x, y, th) in (1usize..=4).prop_flat_map(|d| (arb_field(d), arb_field(d),
            prop::collection::vec(arb_poly(d), d))))
        {
            // dθ(X,Y) = X θ(Y) - Y θ(X) - θ([X,Y]) for arbitrary θ
            let th = PolyCovector::new(th).unwrap();
            let lhs = th.d_pair(&x, &y);
            let rhs = &(&x.apply(&th.pair(&y)) - &y.apply(&th.pair(&x))) - &th.pair(&poly_bracket(&x, &y).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
