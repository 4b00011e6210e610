//! Exact multivariate polynomials over the rationals.

use crate::error::Error;
use crate::order::{Monomial, MonomialOrder};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub type Coef = BigRational;

pub fn coef_int(n: i64) -> Coef {
    BigRational::from_integer(BigInt::from(n))
}

pub fn coef_ratio(n: i64, d: i64) -> Coef {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A polynomial stored as a map from monomials to nonzero coefficients.
/// The map key order is a storage order only; printing and leading terms
/// use an explicit [`MonomialOrder`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Coef>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Polynomial::constant(nvars, Coef::one())
    }

    pub fn constant(nvars: usize, c: Coef) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(nvars), c);
        }
        Polynomial { nvars, terms }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Polynomial::term(nvars, Monomial::var(nvars, i), Coef::one())
    }

    pub fn term(nvars: usize, m: Monomial, c: Coef) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { nvars, terms }
    }

    pub fn from_terms(nvars: usize, it: impl IntoIterator<Item = (Monomial, Coef)>) -> Self {
        let mut p = Polynomial::zero(nvars);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coef)> {
        self.terms.iter()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    pub fn constant_coef(&self) -> Coef {
        self.terms
            .get(&Monomial::one(self.nvars))
            .cloned()
            .unwrap_or_else(Coef::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: Coef) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(m.nvars(), self.nvars);
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Coef) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Multiplies by the single term `c * m`.
    pub fn mul_term(&self, m: &Monomial, c: &Coef) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(mm, cc)| (mm.mul(m), cc * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            for (mm, cc) in &other.terms {
                out.add_term(m.mul(mm), c * cc);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::one(self.nvars);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn leading_term<'a>(&'a self, order: &MonomialOrder) -> Option<(&'a Monomial, &'a Coef)> {
        self.terms.iter().max_by(|(a, _), (b, _)| order.cmp(a, b))
    }

    /// Makes the leading coefficient 1 in the given order.
    pub fn monic(&self, order: &MonomialOrder) -> Polynomial {
        match self.leading_term(order) {
            None => self.clone(),
            Some((_, c)) => {
                let inv = Coef::one() / c.clone();
                self.scale(&inv)
            }
        }
    }

    /// Substitutes `images[i]` for variable `i`; the images live in a ring
    /// with `target_nvars` variables.
    pub fn substitute(&self, images: &[Polynomial], target_nvars: usize) -> Polynomial {
        debug_assert_eq!(images.len(), self.nvars);
        let mut out = Polynomial::zero(target_nvars);
        for (m, c) in &self.terms {
            let mut acc = Polynomial::constant(target_nvars, c.clone());
            for (i, image) in images.iter().enumerate() {
                let e = m.exp(i);
                if e > 0 {
                    acc = acc.mul(&image.pow(e));
                }
            }
            out = out.add(&acc);
        }
        out
    }

    /// Extends to a ring with `extra` new trailing variables.
    pub fn extended(&self, extra: usize) -> Polynomial {
        Polynomial {
            nvars: self.nvars + extra,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.extended(extra), c.clone()))
                .collect(),
        }
    }

    /// Formal partial derivative with respect to variable `i`.
    pub fn formal_derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.exp(i);
            if e > 0 {
                let mut exps = m.exps().to_vec();
                exps[i] = e - 1;
                out.add_term(Monomial::from_exps(exps), c * coef_int(e as i64));
            }
        }
        out
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exp(var) > 0)
    }

    pub fn max_exp(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(var)).max().unwrap_or(0)
    }

    /// Canonical text: terms descending in `order`, coefficients exact.
    pub fn display(&self, order: &MonomialOrder, vars: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut monos: Vec<&Monomial> = self.terms.keys().collect();
        monos.sort_by(|a, b| order.cmp(b, a));
        let mut out = String::new();
        for (idx, m) in monos.iter().enumerate() {
            let c = &self.terms[*m];
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for (i, var) in vars.iter().enumerate().take(self.nvars) {
                let e = m.exp(i);
                if e == 1 {
                    factors.push(var.clone());
                } else if e > 1 {
                    let mut f = var.clone();
                    let _ = write!(f, "^{}", e);
                    factors.push(f);
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Parses the text syntax: `a/b` coefficients, `*` products, `^` powers,
    /// `+`/`-` term separators, e.g. `3/2*x^2*y - 1`.
    pub fn parse(input: &str, vars: &[String]) -> Result<Polynomial, Error> {
        let nvars = vars.len();
        let mut p = Polynomial::zero(nvars);
        let s: Vec<char> = input.chars().collect();
        let mut i = 0usize;
        let err = |msg: &str| Error::PolynomialSyntax {
            text: input.to_string(),
            msg: msg.to_string(),
        };

        fn skip_ws(s: &[char], i: &mut usize) {
            while *i < s.len() && s[*i].is_whitespace() {
                *i += 1;
            }
        }
        fn read_uint(s: &[char], i: &mut usize) -> Option<BigInt> {
            let start = *i;
            while *i < s.len() && s[*i].is_ascii_digit() {
                *i += 1;
            }
            if *i == start {
                return None;
            }
            let text: String = s[start..*i].iter().collect();
            text.parse::<BigInt>().ok()
        }
        fn read_ident(s: &[char], i: &mut usize) -> Option<String> {
            let start = *i;
            if *i < s.len() && (s[*i].is_ascii_alphabetic() || s[*i] == '_') {
                *i += 1;
                while *i < s.len() && (s[*i].is_ascii_alphanumeric() || s[*i] == '_') {
                    *i += 1;
                }
                Some(s[start..*i].iter().collect())
            } else {
                None
            }
        }

        skip_ws(&s, &mut i);
        if i == s.len() {
            return Err(err("empty polynomial"));
        }
        while i < s.len() {
            // sign
            let mut sign = 1i64;
            skip_ws(&s, &mut i);
            if i < s.len() && (s[i] == '+' || s[i] == '-') {
                if s[i] == '-' {
                    sign = -1;
                }
                i += 1;
            }
            skip_ws(&s, &mut i);
            if i == s.len() {
                return Err(err("dangling sign"));
            }
            // one term: factors separated by '*'
            let mut coef = BigRational::from_integer(BigInt::from(sign));
            let mut mono = Monomial::one(nvars);
            let mut first_factor = true;
            loop {
                skip_ws(&s, &mut i);
                if let Some(n) = read_uint(&s, &mut i) {
                    let mut c = BigRational::from_integer(n);
                    skip_ws(&s, &mut i);
                    if i < s.len() && s[i] == '/' {
                        i += 1;
                        skip_ws(&s, &mut i);
                        match read_uint(&s, &mut i) {
                            Some(d) if !d.is_zero() => {
                                c /= BigRational::from_integer(d);
                            }
                            _ => return Err(err("bad denominator")),
                        }
                    }
                    coef *= c;
                } else if let Some(name) = read_ident(&s, &mut i) {
                    let vi = vars.iter().position(|v| *v == name).ok_or_else(|| {
                        Error::PolynomialSyntax {
                            text: input.to_string(),
                            msg: format!("unknown variable `{}`", name),
                        }
                    })?;
                    let mut e = 1u32;
                    skip_ws(&s, &mut i);
                    if i < s.len() && s[i] == '^' {
                        i += 1;
                        skip_ws(&s, &mut i);
                        match read_uint(&s, &mut i) {
                            Some(n) => {
                                e = u32::try_from(n).map_err(|_| err("exponent too large"))?;
                            }
                            None => return Err(err("missing exponent")),
                        }
                    }
                    mono = mono.mul(&Monomial::from_exps({
                        let mut exps = vec![0; nvars];
                        exps[vi] = e;
                        exps
                    }));
                } else if first_factor {
                    return Err(err("expected coefficient or variable"));
                } else {
                    return Err(err("expected factor after `*`"));
                }
                first_factor = false;
                skip_ws(&s, &mut i);
                if i < s.len() && s[i] == '*' {
                    i += 1;
                    continue;
                }
                break;
            }
            p.add_term(mono, coef);
            skip_ws(&s, &mut i);
            if i < s.len() && s[i] != '+' && s[i] != '-' {
                return Err(err("expected `+` or `-` between terms"));
            }
        }
        Ok(p)
    }
}
