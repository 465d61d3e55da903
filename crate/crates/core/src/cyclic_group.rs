//! Multiplicative groups modulo a prime, their cyclic factor subgroups and
//! the finite functional subspaces the halting protocol runs on.

use std::collections::HashMap;

use thiserror::Error;

/// Largest prime accepted by [`find_primitive_root`] and friends.
pub const MAX_PRIME: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {p} exceeds the supported maximum {max}")]
    TooLarge { p: u64, max: u64 },
    #[error("{g} does not generate the multiplicative group modulo {p}")]
    NotAGenerator { g: u64, p: u64 },
    #[error("factor index {index} out of range (group has {count} prime-power factors)")]
    FactorIndex { index: usize, count: usize },
    #[error("group of order {order} has no nontrivial cyclic factor")]
    Trivial { order: u64 },
}

/// One prime-power factor `m = p^a` of the group order `n = m * cofactor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorEntry {
    pub prime: u64,
    pub exponent: u32,
    pub m: u64,
    pub cofactor: u64,
}

/// Prime-power decomposition of `n`, ordered by ascending `m`.
pub fn factorize_order(n: u64) -> Vec<FactorEntry> {
    let mut out = Vec::new();
    let mut rest = n;
    let mut d = 2u64;
    while d.saturating_mul(d) <= rest {
        if rest % d == 0 {
            let mut exponent = 0;
            let mut m = 1;
            while rest % d == 0 {
                rest /= d;
                exponent += 1;
                m *= d;
            }
            out.push(FactorEntry { prime: d, exponent, m, cofactor: n / m });
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        out.push(FactorEntry { prime: rest, exponent: 1, m: rest, cofactor: n / rest });
    }
    out.sort_by_key(|f| f.m);
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

fn check_prime(p: u64) -> Result<(), GroupError> {
    if p > MAX_PRIME {
        return Err(GroupError::TooLarge { p, max: MAX_PRIME });
    }
    if !is_prime(p) {
        return Err(GroupError::NotPrime(p));
    }
    Ok(())
}

fn generates(g: u64, p: u64, factors: &[FactorEntry]) -> bool {
    let n = p - 1;
    g % p != 0 && factors.iter().all(|f| mod_pow(g, n / f.prime, p) != 1)
}

/// Smallest generator of `Z_p^*`.
pub fn find_primitive_root(p: u64) -> Result<u64, GroupError> {
    check_prime(p)?;
    if p == 2 {
        return Ok(1);
    }
    let factors = factorize_order(p - 1);
    (2..p)
        .find(|&g| generates(g, p, &factors))
        .ok_or(GroupError::NotAGenerator { g: 0, p })
}

/// `Z_p^*` together with a generator and the decomposition of its order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupFactorization {
    pub p: u64,
    pub generator: u64,
    pub factors: Vec<FactorEntry>,
}

impl GroupFactorization {
    pub fn new(p: u64) -> Result<Self, GroupError> {
        let generator = find_primitive_root(p)?;
        Ok(Self { p, generator, factors: factorize_order(p - 1) })
    }

    pub fn with_generator(p: u64, generator: u64) -> Result<Self, GroupError> {
        check_prime(p)?;
        let factors = factorize_order(p - 1);
        let ok = if p == 2 { generator % 2 == 1 } else { generates(generator, p, &factors) };
        if !ok {
            return Err(GroupError::NotAGenerator { g: generator, p });
        }
        Ok(Self { p, generator, factors })
    }

    pub fn order(&self) -> u64 {
        self.p - 1
    }

    /// Number of prime-power factors.
    pub fn r(&self) -> usize {
        self.factors.len()
    }

    /// Factor `k`, 1-based as in the ordering of [`factorize_order`].
    pub fn factor(&self, k: usize) -> Result<FactorEntry, GroupError> {
        if k == 0 || k > self.factors.len() {
            return Err(GroupError::FactorIndex { index: k, count: self.factors.len() });
        }
        Ok(self.factors[k - 1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubspaceKind {
    /// Values `(g^M)^x mod p`, desired value 1.
    Multiplicative,
    /// Values `x` in `Z_m`, desired value 0.
    Additive,
}

/// The `m` values `f(x)`, `x = 0..m-1`, on which the cyclic shift acts.
#[derive(Debug, Clone)]
pub struct FunctionalSubspace {
    kind: SubspaceKind,
    values: Vec<u64>,
    positions: HashMap<u64, usize>,
}

impl FunctionalSubspace {
    pub fn kind(&self) -> SubspaceKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// `f(x)`.
    pub fn value(&self, x: usize) -> u64 {
        self.values[x % self.values.len()]
    }

    pub fn position(&self, value: u64) -> Option<usize> {
        self.positions.get(&value).copied()
    }

    /// `f(x) -> f((x+1) mod m)`; values outside the subspace are left alone.
    pub fn apply_shift(&self, value: u64) -> u64 {
        match self.position(value) {
            Some(x) => self.value(x + 1),
            None => value,
        }
    }

    /// Shift on positions.
    pub fn shift_index(&self, x: usize) -> usize {
        (x + 1) % self.values.len()
    }
}

/// Subspace attached to factor `k` (1-based) of the group.
pub fn build_subspace(
    group: &GroupFactorization,
    k: usize,
    kind: SubspaceKind,
) -> Result<FunctionalSubspace, GroupError> {
    let factor = group.factor(k)?;
    let m = factor.m as usize;
    let values: Vec<u64> = match kind {
        SubspaceKind::Multiplicative => {
            let h = mod_pow(group.generator, factor.cofactor, group.p);
            let mut v = Vec::with_capacity(m);
            let mut cur = 1 % group.p;
            for _ in 0..m {
                v.push(cur);
                cur = (cur as u128 * h as u128 % group.p as u128) as u64;
            }
            v
        }
        SubspaceKind::Additive => (0..factor.m).collect(),
    };
    let positions = values.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    Ok(FunctionalSubspace { kind, values, positions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_orders() {
        let f = factorize_order(6);
        assert_eq!(
            f,
            vec![
                FactorEntry { prime: 2, exponent: 1, m: 2, cofactor: 3 },
                FactorEntry { prime: 3, exponent: 1, m: 3, cofactor: 2 }
            ]
        );
        assert!(factorize_order(1).is_empty());
        let f = factorize_order(22);
        assert_eq!(f.iter().map(|e| e.m).collect::<Vec<_>>(), vec![2, 11]);
        let f = factorize_order(72);
        assert_eq!(f.iter().map(|e| (e.m, e.exponent)).collect::<Vec<_>>(), vec![(8, 3), (9, 2)]);
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(find_primitive_root(7), Ok(3));
        assert_eq!(find_primitive_root(11), Ok(2));
        assert_eq!(find_primitive_root(23), Ok(5));
        assert_eq!(find_primitive_root(2), Ok(1));
        assert_eq!(find_primitive_root(9), Err(GroupError::NotPrime(9)));
        assert!(matches!(find_primitive_root(1_000_003), Err(GroupError::TooLarge { .. })));
    }

    #[test]
    fn generator_validation() {
        assert!(GroupFactorization::with_generator(7, 5).is_ok());
        assert_eq!(
            GroupFactorization::with_generator(7, 2),
            Err(GroupError::NotAGenerator { g: 2, p: 7 })
        );
    }

    #[test]
    fn subspaces_mod_seven() {
        let g = GroupFactorization::new(7).unwrap();
        let s = build_subspace(&g, 2, SubspaceKind::Multiplicative).unwrap();
        assert_eq!(s.values(), &[1, 2, 4]);
        assert_eq!(s.apply_shift(4), 1);
        assert_eq!(s.apply_shift(3), 3);
        let s = build_subspace(&g, 1, SubspaceKind::Multiplicative).unwrap();
        assert_eq!(s.values(), &[1, 6]);
        let s = build_subspace(&g, 2, SubspaceKind::Additive).unwrap();
        assert_eq!(s.values(), &[0, 1, 2]);
        assert!(matches!(
            build_subspace(&g, 3, SubspaceKind::Additive),
            Err(GroupError::FactorIndex { index: 3, count: 2 })
        ));
    }
}
