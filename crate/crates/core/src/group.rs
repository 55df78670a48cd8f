//! Finite groups given by Cayley tables, functions on them, and characters of
//! abelian groups.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::GroupError;

/// Element index into a [`FiniteGroup`]. The identity is always `0`.
pub type Element = usize;

const MAX_CYCLIC: usize = 4096;
const MAX_ORDER: usize = 4096;

/// Constructor description, as it appears in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic { n: usize },
    Product { factors: Vec<GroupSpec> },
    Dihedral { n: usize },
    Symmetric { n: usize },
    /// Arbitrary Cayley table, `mul[a][b] = a * b`, identity at index 0.
    Table {
        mul: Vec<Vec<usize>>,
        #[serde(default)]
        name: Option<String>,
    },
}

#[derive(Debug)]
struct GroupData {
    name: String,
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    /// Orders of cyclic factors when elements are enumerated as
    /// lexicographic tuples of residues.
    cyclic_factors: Option<Vec<usize>>,
}

/// Immutable finite group; cloning shares the table.
#[derive(Clone)]
pub struct FiniteGroup(Arc<GroupData>);

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.mul == other.0.mul
    }
}

impl Eq for FiniteGroup {}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({}, order {})", self.0.name, self.0.order)
    }
}

impl FiniteGroup {
    /// Validates a Cayley table: Latin square, identity at 0, associative.
    pub fn from_table(name: impl Into<String>, mul: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = mul.len();
        if n == 0 {
            return Err(GroupError::Malformed("empty multiplication table".into()));
        }
        if n > MAX_ORDER {
            return Err(GroupError::OutOfRange(format!("order {n} exceeds {MAX_ORDER}")));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (a, row) in mul.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::Malformed(format!(
                    "row {a} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&v| v >= n) {
                return Err(GroupError::Malformed(format!("entry {bad} in row {a} is out of range")));
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(name.into(), n, flat, None)
    }

    fn from_flat(
        name: String,
        n: usize,
        mul: Vec<usize>,
        cyclic_factors: Option<Vec<usize>>,
    ) -> Result<Self, GroupError> {
        for a in 0..n {
            if mul[a] != a || mul[a * n] != a {
                return Err(GroupError::NotAGroup(format!("element 0 is not a two-sided identity at {a}")));
            }
        }
        let mut seen = vec![false; n];
        for a in 0..n {
            seen.fill(false);
            for b in 0..n {
                let v = mul[a * n + b];
                if std::mem::replace(&mut seen[v], true) {
                    return Err(GroupError::NotAGroup(format!("row {a} repeats element {v}")));
                }
            }
        }
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            inv[a] = (0..n)
                .find(|&b| mul[a * n + b] == 0)
                .ok_or_else(|| GroupError::NotAGroup(format!("element {a} has no inverse")))?;
            if mul[inv[a] * n + a] != 0 {
                return Err(GroupError::NotAGroup(format!("element {a} has no two-sided inverse")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mul[a * n + b];
                for c in 0..n {
                    if mul[ab * n + c] != mul[a * n + mul[b * n + c]] {
                        return Err(GroupError::NotAGroup(format!(
                            "associativity fails at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(Self(Arc::new(GroupData {
            name,
            order: n,
            mul,
            inv,
            cyclic_factors,
        })))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn identity(&self) -> Element {
        0
    }

    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        self.0.mul[a * self.0.order + b]
    }

    #[inline]
    pub fn inv(&self, a: Element) -> Element {
        self.0.inv[a]
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.0.order
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn element_order(&self, a: Element) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn cayley_table(&self) -> Vec<Vec<usize>> {
        self.0.mul.chunks(self.order()).map(<[usize]>::to_vec).collect()
    }

    pub(crate) fn cyclic_factors(&self) -> Option<&[usize]> {
        self.0.cyclic_factors.as_deref()
    }
}

pub fn cyclic(n: usize) -> Result<FiniteGroup, GroupError> {
    if n == 0 || n > MAX_CYCLIC {
        return Err(GroupError::OutOfRange(format!("cyclic order {n} not in 1..={MAX_CYCLIC}")));
    }
    let mul = (0..n * n).map(|k| (k / n + k % n) % n).collect();
    FiniteGroup::from_flat(format!("Z{n}"), n, mul, Some(vec![n]))
}

/// Direct product with elements ordered lexicographically: `(a, b)` has index
/// `a * |H| + b`.
pub fn direct_product(factors: &[FiniteGroup]) -> Result<FiniteGroup, GroupError> {
    if factors.is_empty() {
        return Err(GroupError::Malformed("product needs at least one factor".into()));
    }
    let order = factors
        .iter()
        .try_fold(1usize, |acc, g| acc.checked_mul(g.order()).filter(|&o| o <= MAX_ORDER))
        .ok_or_else(|| GroupError::OutOfRange(format!("product order exceeds {MAX_ORDER}")))?;
    let decompose = |mut k: usize| {
        let mut digits = vec![0; factors.len()];
        for (d, g) in digits.iter_mut().zip(factors).rev() {
            *d = k % g.order();
            k /= g.order();
        }
        digits
    };
    let digits: Vec<Vec<usize>> = (0..order).map(decompose).collect();
    let mut mul = Vec::with_capacity(order * order);
    for a in &digits {
        for b in &digits {
            let idx = factors
                .iter()
                .zip(a.iter().zip(b))
                .fold(0, |acc, (g, (&x, &y))| acc * g.order() + g.mul(x, y));
            mul.push(idx);
        }
    }
    let cyclic_factors = factors
        .iter()
        .map(|g| g.cyclic_factors().map(<[usize]>::to_vec))
        .collect::<Option<Vec<_>>>()
        .map(|v| v.concat());
    let name = factors.iter().map(FiniteGroup::name).collect::<Vec<_>>().join("x");
    FiniteGroup::from_flat(name, order, mul, cyclic_factors)
}

/// Dihedral group of order `2n`: index `k` is `r^k`, index `n + k` is `s r^k`.
pub fn dihedral(n: usize) -> Result<FiniteGroup, GroupError> {
    if !(3..=MAX_ORDER / 2).contains(&n) {
        return Err(GroupError::OutOfRange(format!("dihedral n = {n} must be at least 3")));
    }
    let order = 2 * n;
    let mut mul = Vec::with_capacity(order * order);
    for a in 0..order {
        let (sa, ka) = (a >= n, a % n);
        for b in 0..order {
            let (sb, kb) = (b >= n, b % n);
            // r^a s = s r^-a
            let (s, k) = match (sa, sb) {
                (false, false) => (false, (ka + kb) % n),
                (false, true) => (true, (kb + n - ka) % n),
                (true, false) => (true, (ka + kb) % n),
                (true, true) => (false, (kb + n - ka) % n),
            };
            mul.push(if s { n + k } else { k });
        }
    }
    FiniteGroup::from_flat(format!("D{n}"), order, mul, None)
}

/// Symmetric group on `n <= 5` letters; permutations in lexicographic order,
/// composed as `(a * b)(i) = a(b(i))`.
pub fn symmetric(n: usize) -> Result<FiniteGroup, GroupError> {
    if !(1..=5).contains(&n) {
        return Err(GroupError::OutOfRange(format!("symmetric n = {n} not in 1..=5")));
    }
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        perms.push(cur.clone());
        // next permutation in lexicographic order
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    let index = |p: &[usize]| perms.binary_search_by(|q| q.as_slice().cmp(p)).unwrap();
    let order = perms.len();
    let mut mul = Vec::with_capacity(order * order);
    for a in &perms {
        for b in &perms {
            let c: Vec<usize> = b.iter().map(|&i| a[i]).collect();
            mul.push(index(&c));
        }
    }
    let cyclic_factors = match n {
        1 => Some(vec![]),
        2 => Some(vec![2]),
        _ => None,
    };
    FiniteGroup::from_flat(format!("S{n}"), order, mul, cyclic_factors)
}

pub fn build_group(spec: &GroupSpec) -> Result<FiniteGroup, GroupError> {
    match spec {
        GroupSpec::Cyclic { n } => cyclic(*n),
        GroupSpec::Product { factors } => {
            let built = factors.iter().map(build_group).collect::<Result<Vec<_>, _>>()?;
            direct_product(&built)
        }
        GroupSpec::Dihedral { n } => dihedral(*n),
        GroupSpec::Symmetric { n } => symmetric(*n),
        GroupSpec::Table { mul, name } => {
            FiniteGroup::from_table(name.clone().unwrap_or_else(|| "table".into()), mul.clone())
        }
    }
}

/// Complex-valued function on a finite group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFunction {
    group: FiniteGroup,
    values: Vec<Complex64>,
}

impl GroupFunction {
    pub fn new(group: FiniteGroup, values: Vec<Complex64>) -> Result<Self, GroupError> {
        if values.len() != group.order() {
            return Err(GroupError::LengthMismatch {
                expected: group.order(),
                got: values.len(),
            });
        }
        Ok(Self { group, values })
    }

    pub fn from_fn(group: &FiniteGroup, f: impl FnMut(Element) -> Complex64) -> Self {
        Self {
            values: group.elements().map(f).collect(),
            group: group.clone(),
        }
    }

    pub fn constant(group: &FiniteGroup, c: Complex64) -> Self {
        Self::from_fn(group, |_| c)
    }

    pub fn delta(group: &FiniteGroup, at: Element) -> Self {
        Self::from_fn(group, |g| if g == at { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
    }

    pub fn from_real(group: &FiniteGroup, values: &[f64]) -> Result<Self, GroupError> {
        Self::new(group.clone(), values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, g: Element) -> Complex64 {
        self.values[g]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            group: self.group.clone(),
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            group: self.group.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self, GroupError> {
        if self.group != other.group {
            return Err(GroupError::GroupMismatch);
        }
        Ok(Self {
            group: self.group.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, GroupError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn pointwise_mul(&self, other: &Self) -> Result<Self, GroupError> {
        self.zip_with(other, |a, b| a * b)
    }

    /// `sum_g self(g) other(g)`, the bilinear pairing of functions.
    pub fn pairing(&self, other: &Self) -> Result<Complex64, GroupError> {
        if self.group != other.group {
            return Err(GroupError::GroupMismatch);
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    /// Left translate `(L_h f)(s) = f(h^-1 s)`.
    pub fn left_translate(&self, h: Element) -> Self {
        let hi = self.group.inv(h);
        Self::from_fn(&self.group, |s| self.values[self.group.mul(hi, s)])
    }

    /// Max entrywise distance to another function on the same group.
    pub fn distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Characters of a finite abelian group; row `j` holds `chi_j(g)` for every `g`.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    group: FiniteGroup,
    chars: Vec<Vec<Complex64>>,
}

impl CharacterTable {
    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.chars[j]
    }

    pub fn value(&self, j: usize, g: Element) -> Complex64 {
        self.chars[j][g]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.chars.iter().map(Vec::as_slice)
    }

    /// `f^(chi) = (1/|G|) sum_g f(g) conj(chi(g))` for every character.
    pub fn fourier(&self, f: &GroupFunction) -> Result<Vec<Complex64>, GroupError> {
        if f.group() != &self.group {
            return Err(GroupError::GroupMismatch);
        }
        let n = self.group.order() as f64;
        Ok(self
            .chars
            .iter()
            .map(|chi| f.values().iter().zip(chi).map(|(v, c)| v * c.conj()).sum::<Complex64>() / n)
            .collect())
    }

    /// `f = sum_chi c(chi) chi`.
    pub fn inverse_fourier(&self, coeffs: &[Complex64]) -> GroupFunction {
        GroupFunction::from_fn(&self.group, |g| {
            coeffs.iter().zip(&self.chars).map(|(c, chi)| c * chi[g]).sum()
        })
    }
}

fn root_of_unity(k: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (k % n) as f64 / n as f64)
}

/// All characters of an abelian group.
///
/// For groups built from cyclic factors, `chi_j(k) = exp(2 pi i j k / n)` per
/// factor and characters of a product are indexed lexicographically like its
/// elements. Groups given by a bare table fall back to enumerating
/// homomorphisms on a generating set.
pub fn character_table(group: &FiniteGroup) -> Result<CharacterTable, GroupError> {
    if !group.is_abelian() {
        return Err(GroupError::NonAbelian(group.name().to_string()));
    }
    let chars = match group.cyclic_factors() {
        Some(factors) => {
            let digits = |mut k: usize| {
                let mut d = vec![0; factors.len()];
                for (slot, &m) in d.iter_mut().zip(factors).rev() {
                    *slot = k % m;
                    k /= m;
                }
                d
            };
            let tuples: Vec<Vec<usize>> = group.elements().map(digits).collect();
            tuples
                .iter()
                .map(|j| {
                    tuples
                        .iter()
                        .map(|g| {
                            factors
                                .iter()
                                .zip(j.iter().zip(g))
                                .map(|(&m, (&a, &b))| root_of_unity(a * b, m))
                                .product()
                        })
                        .collect()
                })
                .collect()
        }
        None => enumerate_characters(group),
    };
    Ok(CharacterTable {
        group: group.clone(),
        chars,
    })
}

fn enumerate_characters(group: &FiniteGroup) -> Vec<Vec<Complex64>> {
    // Greedy generating set.
    let n = group.order();
    let mut span = vec![false; n];
    span[0] = true;
    let mut gens = Vec::new();
    while let Some(g) = (0..n).find(|&g| !span[g]) {
        gens.push(g);
        let mut members: Vec<usize> = (0..n).filter(|&x| span[x]).collect();
        let mut frontier = members.clone();
        while let Some(x) = frontier.pop() {
            let y = group.mul(x, g);
            if !span[y] {
                span[y] = true;
                members.push(y);
                frontier.push(y);
            }
        }
    }
    let orders: Vec<usize> = gens.iter().map(|&g| group.element_order(g)).collect();
    let mut out = Vec::new();
    let mut exps = vec![0usize; gens.len()];
    loop {
        // Extend the assignment gen_i -> exp(2 pi i e_i / o_i) breadth-first.
        let mut vals: Vec<Option<Complex64>> = vec![None; n];
        vals[0] = Some(Complex64::new(1.0, 0.0));
        let mut queue = vec![0usize];
        let mut consistent = true;
        while let Some(x) = queue.pop() {
            for (i, &g) in gens.iter().enumerate() {
                let y = group.mul(x, g);
                let v = vals[x].unwrap() * root_of_unity(exps[i], orders[i]);
                match vals[y] {
                    None => {
                        vals[y] = Some(v);
                        queue.push(y);
                    }
                    Some(w) if (w - v).norm() > 1e-9 => consistent = false,
                    Some(_) => {}
                }
            }
        }
        if consistent {
            out.push(vals.into_iter().map(Option::unwrap).collect());
        }
        // advance the mixed-radix counter
        let mut k = 0;
        loop {
            if k == exps.len() {
                return out;
            }
            exps[k] += 1;
            if exps[k] < orders[k] {
                break;
            }
            exps[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_group() {
        let g = cyclic(1).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.mul(0, 0), 0);
        assert_eq!(g.inv(0), 0);
    }

    #[test]
    fn klein_is_exponent_two() {
        let g = build_group(&GroupSpec::Product {
            factors: vec![GroupSpec::Cyclic { n: 2 }, GroupSpec::Cyclic { n: 2 }],
        })
        .unwrap();
        assert_eq!(g.order(), 4);
        assert!(g.elements().all(|x| g.inv(x) == x));
        assert!(g.is_abelian());
    }

    #[test]
    fn symmetric_three_is_nonabelian() {
        let g = symmetric(3).unwrap();
        assert_eq!(g.order(), 6);
        let pair = g
            .elements()
            .flat_map(|a| g.elements().map(move |b| (a, b)))
            .find(|&(a, b)| g.mul(a, b) != g.mul(b, a));
        assert!(pair.is_some());
    }

    #[test]
    fn constructor_ranges() {
        assert!(cyclic(0).is_err());
        assert!(dihedral(2).is_err());
        assert!(symmetric(6).is_err());
        assert!(symmetric(0).is_err());
        assert_eq!(symmetric(5).unwrap().order(), 120);
        assert_eq!(dihedral(4).unwrap().order(), 8);
    }

    #[test]
    fn table_validation() {
        assert!(FiniteGroup::from_table("bad", vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(FiniteGroup::from_table("bad", vec![vec![0, 1], vec![1]]).is_err());
        assert!(FiniteGroup::from_table("bad", vec![vec![1, 0], vec![0, 1]]).is_err());
        // Latin square with identity that is not associative.
        let quasi = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(
            FiniteGroup::from_table("loop", quasi),
            Err(GroupError::NotAGroup(_))
        ));
        let z3 = FiniteGroup::from_table("z3", vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]).unwrap();
        assert_eq!(z3, cyclic(3).unwrap());
    }

    #[test]
    fn cyclic_characters() {
        let t = character_table(&cyclic(2).unwrap()).unwrap();
        assert!((t.value(0, 1) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((t.value(1, 1) - c(-1.0, 0.0)).norm() < 1e-15);
        let t4 = character_table(&cyclic(4).unwrap()).unwrap();
        assert!((t4.value(1, 1) - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn nonabelian_character_table_is_rejected() {
        assert!(matches!(
            character_table(&symmetric(3).unwrap()),
            Err(GroupError::NonAbelian(_))
        ));
    }

    #[test]
    fn table_groups_use_enumerated_characters() {
        let k = direct_product(&[cyclic(2).unwrap(), cyclic(4).unwrap()]).unwrap();
        let bare = FiniteGroup::from_table("bare", k.cayley_table()).unwrap();
        let t = character_table(&bare).unwrap();
        assert_eq!(t.len(), 8);
        for chi in t.rows() {
            for a in bare.elements() {
                for b in bare.elements() {
                    assert!((chi[bare.mul(a, b)] - chi[a] * chi[b]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn translate_and_pairing() {
        let g = cyclic(5).unwrap();
        let f = GroupFunction::delta(&g, 1);
        assert_eq!(f.left_translate(2), GroupFunction::delta(&g, 3));
        let h = GroupFunction::constant(&g, c(2.0, 0.0));
        assert_eq!(f.pairing(&h).unwrap(), c(2.0, 0.0));
        assert!(GroupFunction::new(g, vec![c(0.0, 0.0)]).is_err());
    }
}
