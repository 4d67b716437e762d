//! Multi-index combinatorics for the Wiener chaos decomposition: sparse
//! multi-indices, characteristic sets, Hermite polynomials, evaluation of the
//! Cameron-Martin basis, and the Wick product on truncated expansions.

use crate::special::{factorial, ln_factorial};
use crate::Error;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// A finitely supported sequence of non-negative integers, stored sparsely as
/// `(basis index k >= 1, multiplicity >= 1)` pairs in increasing index order.
/// Zeros are never stored; the order `|alpha|` is cached.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    entries: Vec<(u32, u32)>,
    order: u32,
}

impl MultiIndex {
    /// The zero multi-index (order 0).
    pub fn zero() -> Self {
        MultiIndex {
            entries: Vec::new(),
            order: 0,
        }
    }

    /// The unit multi-index with a single 1 at position `k` (1-based).
    pub fn unit(k: u32) -> Self {
        assert!(k >= 1, "basis indices are 1-based");
        MultiIndex {
            entries: vec![(k, 1)],
            order: 1,
        }
    }

    /// Build from `(index, multiplicity)` pairs; indices need not be sorted,
    /// duplicates are merged, zero multiplicities are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for (k, m) in pairs {
            assert!(k >= 1, "basis indices are 1-based");
            if m > 0 {
                *map.entry(k).or_insert(0) += m;
            }
        }
        let entries: Vec<(u32, u32)> = map.into_iter().collect();
        let order = entries.iter().map(|&(_, m)| m).sum();
        MultiIndex { entries, order }
    }

    /// `|alpha|`, the total order.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Multiplicity at basis index `k` (1-based); 0 if not stored.
    pub fn get(&self, k: u32) -> u32 {
        self.entries
            .binary_search_by_key(&k, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    /// Iterator over stored `(index, multiplicity)` pairs, ascending index.
    pub fn entries(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.entries.iter().copied()
    }

    /// Largest stored basis index, or 0 for the zero index.
    pub fn support_max(&self) -> u32 {
        self.entries.last().map(|&(k, _)| k).unwrap_or(0)
    }

    /// `alpha - eps(k)` if `alpha_k >= 1`.
    pub fn decrement(&self, k: u32) -> Option<MultiIndex> {
        let pos = self.entries.binary_search_by_key(&k, |&(i, _)| i).ok()?;
        let mut entries = self.entries.clone();
        if entries[pos].1 == 1 {
            entries.remove(pos);
        } else {
            entries[pos].1 -= 1;
        }
        Some(MultiIndex {
            entries,
            order: self.order - 1,
        })
    }

    /// `alpha + beta`, entry-wise.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex::from_pairs(self.entries().chain(other.entries()))
    }

    /// `alpha! = prod_k alpha_k!` as f64. Exact for orders up to 20; larger
    /// orders go through log-Gamma.
    pub fn factorial(&self) -> f64 {
        if self.order <= 20 {
            self.entries.iter().map(|&(_, m)| factorial(m)).product()
        } else {
            self.ln_factorial().exp()
        }
    }

    /// `ln(alpha!)`
    pub fn ln_factorial(&self) -> f64 {
        self.entries.iter().map(|&(_, m)| ln_factorial(m)).sum()
    }

    /// Characteristic set: the sorted n-tuple listing each index with its
    /// multiplicity. Errors on the zero index.
    pub fn characteristic_set(&self) -> Result<CharacteristicSet, Error> {
        if self.is_zero() {
            return Err(Error::ZeroOrderCharacteristicSet);
        }
        let mut indices = Vec::with_capacity(self.order as usize);
        for &(k, m) in &self.entries {
            indices.extend(std::iter::repeat_n(k, m as usize));
        }
        Ok(CharacteristicSet { indices })
    }

    /// Canonical text form `"k1^a1 k2^a2 ..."`; the zero index prints as "0".
    pub fn canonical_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for &(k, m) in &self.entries {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{k}^{m}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "0" {
            return Ok(MultiIndex::zero());
        }
        let mut pairs = Vec::new();
        for token in s.split_whitespace() {
            let (k, m) = token
                .split_once('^')
                .ok_or_else(|| Error::Parse(format!("bad multi-index token {token:?}")))?;
            let k: u32 = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad basis index in {token:?}")))?;
            let m: u32 = m
                .parse()
                .map_err(|_| Error::Parse(format!("bad multiplicity in {token:?}")))?;
            if k == 0 || m == 0 {
                return Err(Error::Parse(format!("zero entry in {token:?}")));
            }
            pairs.push((k, m));
        }
        Ok(MultiIndex::from_pairs(pairs))
    }
}

/// Ordering: lexicographic on characteristic sets, zero index first. This is
/// the canonical order used by enumeration and coefficient exports.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let mut a = self
            .entries
            .iter()
            .flat_map(|&(k, m)| std::iter::repeat_n(k, m as usize));
        let mut b = other
            .entries
            .iter()
            .flat_map(|&(k, m)| std::iter::repeat_n(k, m as usize));
        loop {
            match (a.next(), b.next()) {
                (None, None) => return std::cmp::Ordering::Equal,
                (None, Some(_)) => return std::cmp::Ordering::Less,
                (Some(_), None) => return std::cmp::Ordering::Greater,
                (Some(x), Some(y)) => match x.cmp(&y) {
                    std::cmp::Ordering::Equal => continue,
                    ord => return ord,
                },
            }
        }
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// The characteristic set `K_alpha`: a non-decreasing tuple of basis indices,
/// of length `|alpha|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacteristicSet {
    indices: Vec<u32>,
}

impl CharacteristicSet {
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Round-trip back to the multi-index.
    pub fn to_multi_index(&self) -> MultiIndex {
        MultiIndex::from_pairs(self.indices.iter().map(|&k| (k, 1)))
    }
}

/// All multi-indices with `|alpha| = order` and support in `1..=max_index`,
/// in canonical (characteristic-set lexicographic) order. The count is
/// `binomial(order + max_index - 1, order)`.
pub fn enumerate_multiindices(order: u32, max_index: u32) -> Vec<MultiIndex> {
    assert!(max_index >= 1);
    if order == 0 {
        return vec![MultiIndex::zero()];
    }
    let mut out = Vec::new();
    let mut stack: Vec<u32> = Vec::with_capacity(order as usize);
    fn rec(out: &mut Vec<MultiIndex>, stack: &mut Vec<u32>, order: u32, max_index: u32) {
        if stack.len() == order as usize {
            out.push(MultiIndex::from_pairs(stack.iter().map(|&k| (k, 1))));
            return;
        }
        let lo = stack.last().copied().unwrap_or(1);
        for k in lo..=max_index {
            stack.push(k);
            rec(out, stack, order, max_index);
            stack.pop();
        }
    }
    rec(&mut out, &mut stack, order, max_index);
    out
}

/// All multi-indices with `|alpha| <= order_cap`, support in
/// `1..=max_index`, grouped by order.
pub fn enumerate_up_to(order_cap: u32, max_index: u32) -> Vec<Vec<MultiIndex>> {
    (0..=order_cap)
        .map(|n| enumerate_multiindices(n, max_index))
        .collect()
}

/// Probabilists' Hermite polynomial `He_n(x)` by the forward three-term
/// recurrence `He_{n+1} = x He_n - n He_{n-1}`.
pub fn hermite(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut cur = x;
            for k in 1..n {
                let next = x * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Evaluate the normalized chaos basis element
/// `xi_alpha = prod_k He_{alpha_k}(xi_k) / sqrt(alpha_k!)` on a draw of
/// standard Gaussians, where `values[k-1]` is the k-th Gaussian.
pub fn chaos_basis_eval(alpha: &MultiIndex, values: &[f64]) -> Result<f64, Error> {
    let needed = alpha.support_max() as usize;
    if needed > values.len() {
        return Err(Error::DrawTooShort {
            needed,
            available: values.len(),
        });
    }
    let mut acc = 1.0;
    for (k, m) in alpha.entries() {
        let xi = values[(k - 1) as usize];
        acc *= hermite(m, xi) / factorial(m).sqrt();
    }
    Ok(acc)
}

/// A truncated scalar chaos expansion `sum_alpha c_alpha xi_alpha`, the
/// coefficient-level object the Wick product acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosExpansion {
    coeffs: BTreeMap<MultiIndex, f64>,
    order_cap: u32,
}

impl ChaosExpansion {
    pub fn new(order_cap: u32) -> Self {
        ChaosExpansion {
            coeffs: BTreeMap::new(),
            order_cap,
        }
    }

    /// A deterministic constant (coefficient at the zero index).
    pub fn constant(value: f64, order_cap: u32) -> Self {
        let mut e = ChaosExpansion::new(order_cap);
        e.set(MultiIndex::zero(), value);
        e
    }

    /// `He_n(xi_k)` as a chaos expansion: a single coefficient `sqrt(n!)` at
    /// `n * eps(k)`.
    pub fn hermite_of_mode(n: u32, k: u32, order_cap: u32) -> Self {
        let mut e = ChaosExpansion::new(order_cap);
        if n == 0 {
            e.set(MultiIndex::zero(), 1.0);
        } else {
            e.set(MultiIndex::from_pairs([(k, n)]), factorial(n).sqrt());
        }
        e
    }

    pub fn order_cap(&self) -> u32 {
        self.order_cap
    }

    pub fn set(&mut self, alpha: MultiIndex, value: f64) {
        assert!(
            alpha.order() <= self.order_cap,
            "coefficient order {} above cap {}",
            alpha.order(),
            self.order_cap
        );
        if value == 0.0 {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, value);
        }
    }

    pub fn get(&self, alpha: &MultiIndex) -> f64 {
        self.coeffs.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(a, &c)| (a, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Result of a truncated Wick product: the output expansion plus the total
/// absolute mass of contributions dropped by the order cap. The product
/// itself is exact; truncation is a property of the representation, so
/// dropped mass is always reported, never silently lost.
#[derive(Debug, Clone)]
pub struct WickProduct {
    pub coeffs: ChaosExpansion,
    pub dropped_mass: f64,
}

/// Wick product of two truncated expansions:
/// `(eta wick zeta)_alpha = sum_{beta+gamma=alpha} sqrt(alpha!/(beta! gamma!)) eta_beta zeta_gamma`,
/// truncated to `eta`'s order cap.
pub fn wick_product(eta: &ChaosExpansion, zeta: &ChaosExpansion) -> WickProduct {
    let cap = eta.order_cap();
    let mut out = ChaosExpansion::new(cap);
    let mut dropped = 0.0;
    for (beta, cb) in eta.iter() {
        for (gamma, cg) in zeta.iter() {
            let alpha = beta.add(gamma);
            let weight = if alpha.order() <= 20 {
                (alpha.factorial() / (beta.factorial() * gamma.factorial())).sqrt()
            } else {
                (0.5 * (alpha.ln_factorial() - beta.ln_factorial() - gamma.ln_factorial()))
                    .exp()
            };
            let contribution = weight * cb * cg;
            if alpha.order() > cap {
                dropped += contribution.abs();
            } else {
                let cur = out.get(&alpha);
                out.set(alpha, cur + contribution);
            }
        }
    }
    WickProduct {
        coeffs: out,
        dropped_mass: dropped,
    }
}
