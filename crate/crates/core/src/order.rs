//! Monomials and monomial orders.

use std::cmp::Ordering;

/// Exponent vector of a power product. The length always equals the
/// variable count of the ambient ring; comparison in a ring order goes
/// through [`MonomialOrder`], the derived `Ord` is only a storage order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial {
            exps: vec![0; nvars],
        }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Monomial { exps }
    }

    pub fn from_exps(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.exps[i]
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn weighted_degree(&self, weights: &[u32]) -> i64 {
        self.exps
            .iter()
            .zip(weights)
            .map(|(&e, &w)| e as i64 * w as i64)
            .sum()
    }

    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.exps.len(), other.exps.len());
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self` when the division is exact.
    pub fn div_into(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        Some(Monomial {
            exps: other
                .exps
                .iter()
                .zip(&self.exps)
                .map(|(b, a)| b - a)
                .collect(),
        })
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| *a.max(b))
                .collect(),
        }
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.exps
            .iter()
            .zip(&other.exps)
            .all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Extends the exponent vector by `extra` trailing zero entries.
    pub fn extended(&self, extra: usize) -> Monomial {
        let mut exps = self.exps.clone();
        exps.extend(std::iter::repeat_n(0, extra));
        Monomial { exps }
    }
}

/// The comparison rule of a monomial order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    Lex,
    GrLex,
    GrevLex,
    /// Eliminates the first `split` variables of the priority list:
    /// compare that block by graded reverse lex first, then the rest.
    Block {
        split: usize,
    },
}

/// A monomial order: a comparison kind plus a priority permutation of the
/// variable indices (`perm[0]` is the most significant variable).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialOrder {
    pub kind: OrderKind,
    pub perm: Vec<usize>,
}

impl MonomialOrder {
    pub fn lex(nvars: usize) -> Self {
        MonomialOrder {
            kind: OrderKind::Lex,
            perm: (0..nvars).collect(),
        }
    }

    pub fn grlex(nvars: usize) -> Self {
        MonomialOrder {
            kind: OrderKind::GrLex,
            perm: (0..nvars).collect(),
        }
    }

    pub fn grevlex(nvars: usize) -> Self {
        MonomialOrder {
            kind: OrderKind::GrevLex,
            perm: (0..nvars).collect(),
        }
    }

    /// Block order that eliminates the given variables.
    pub fn elimination(nvars: usize, eliminated: &[usize]) -> Self {
        let mut perm: Vec<usize> = eliminated.to_vec();
        perm.sort_unstable();
        perm.dedup();
        let split = perm.len();
        for i in 0..nvars {
            if !perm[..split].contains(&i) {
                perm.push(i);
            }
        }
        MonomialOrder {
            kind: OrderKind::Block { split },
            perm,
        }
    }

    pub fn nvars(&self) -> usize {
        self.perm.len()
    }

    /// Same kind, with `extra` new variables appended at lowest priority.
    pub fn extended(&self, extra: usize) -> MonomialOrder {
        let n = self.perm.len();
        let mut perm = self.perm.clone();
        perm.extend(n..n + extra);
        MonomialOrder {
            kind: self.kind,
            perm,
        }
    }

    fn cmp_block(&self, a: &Monomial, b: &Monomial, range: std::ops::Range<usize>) -> Ordering {
        // graded reverse lex within the priority slice
        let deg = |m: &Monomial| -> u64 { range.clone().map(|k| m.exp(self.perm[k]) as u64).sum() };
        match deg(a).cmp(&deg(b)) {
            Ordering::Equal => {}
            o => return o,
        }
        for k in range.rev() {
            let (ea, eb) = (a.exp(self.perm[k]), b.exp(self.perm[k]));
            if ea != eb {
                // smaller exponent in the least significant position wins
                return eb.cmp(&ea);
            }
        }
        Ordering::Equal
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        debug_assert_eq!(a.nvars(), self.perm.len());
        debug_assert_eq!(b.nvars(), self.perm.len());
        let n = self.perm.len();
        match self.kind {
            OrderKind::Lex => {
                for k in 0..n {
                    let (ea, eb) = (a.exp(self.perm[k]), b.exp(self.perm[k]));
                    if ea != eb {
                        return ea.cmp(&eb);
                    }
                }
                Ordering::Equal
            }
            OrderKind::GrLex => match a.degree().cmp(&b.degree()) {
                Ordering::Equal => {
                    for k in 0..n {
                        let (ea, eb) = (a.exp(self.perm[k]), b.exp(self.perm[k]));
                        if ea != eb {
                            return ea.cmp(&eb);
                        }
                    }
                    Ordering::Equal
                }
                o => o,
            },
            OrderKind::GrevLex => self.cmp_block(a, b, 0..n),
            OrderKind::Block { split } => match self.cmp_block(a, b, 0..split) {
                Ordering::Equal => self.cmp_block(a, b, split..n),
                o => o,
            },
        }
    }

    /// Whether a monomial involves only variables outside `vars`.
    pub fn free_of(m: &Monomial, vars: &[usize]) -> bool {
        vars.iter().all(|&v| m.exp(v) == 0)
    }
}
